//! State and channel files.
//!
//! Numbers are written with 17 significant digits and a lowercase exponent
//! (`-2.5000000000000000e-1`), which parses back to the identical `f64`; a
//! write → read → write cycle is therefore byte-identical.
//!
//! The writers are exercised by tests, which also regenerate the files under
//! `data/` when `COHERLAB_BLESS=1` is set.
#![cfg_attr(not(test), allow(dead_code))]

use std::fmt::Write as _;

use coherlab::channels::{KrausChannel, ProductKrausChannel};
use coherlab::{ComplexMatrix, DensityMatrix, PureState};
use num_complex::Complex64 as C64;
use serde::Deserialize;

use crate::CliError;

/// Largest total dimension accepted from a file.
pub const MAX_DIM: usize = 1024;

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_pairs(out: &mut String, values: &[C64], indent: &str) {
    out.push('[');
    for (i, z) in values.iter().enumerate() {
        out.push_str(if i == 0 { "\n" } else { ",\n" });
        let _ = write!(out, "{indent}  [{}, {}]", fmt_num(z.re), fmt_num(z.im));
    }
    let _ = write!(out, "\n{indent}]");
}

fn write_dims(dims: &[usize]) -> String {
    let parts: Vec<String> = dims.iter().map(usize::to_string).collect();
    format!("[{}]", parts.join(", "))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Density,
    Pure,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    dims: Vec<usize>,
    matrix: Vec<[f64; 2]>,
    kind: Kind,
}

/// A state as read from a file or built in.
#[derive(Clone, Debug)]
pub enum State {
    Pure(PureState),
    Density(DensityMatrix),
}

impl State {
    pub fn density(&self) -> DensityMatrix {
        match self {
            State::Pure(psi) => psi.to_density(),
            State::Density(rho) => rho.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let (kind, dims, values) = match self {
            State::Pure(psi) => ("pure", psi.dims(), psi.amplitudes().to_vec()),
            State::Density(rho) => ("density", rho.dims(), rho.matrix().as_slice().to_vec()),
        };
        let mut out = String::new();
        let _ = write!(out, "{{\n  \"dims\": {},\n  \"kind\": \"{kind}\",\n  \"matrix\": ", write_dims(dims));
        write_pairs(&mut out, &values, "  ");
        out.push_str("\n}\n");
        out
    }
}

fn checked_dim(dims: &[usize]) -> Result<usize, CliError> {
    if dims.is_empty() {
        return Err(CliError::Invariant("dims must be non-empty".into()));
    }
    let mut n: usize = 1;
    for &d in dims {
        if d == 0 {
            return Err(CliError::Invariant("every subsystem dimension must be at least 1".into()));
        }
        n = n
            .checked_mul(d)
            .filter(|&n| n <= MAX_DIM)
            .ok_or_else(|| CliError::Invariant(format!("total dimension exceeds {MAX_DIM}")))?;
    }
    Ok(n)
}

fn complex(pairs: &[[f64; 2]]) -> Result<Vec<C64>, CliError> {
    pairs
        .iter()
        .map(|&[re, im]| {
            if re.is_finite() && im.is_finite() {
                Ok(C64::new(re, im))
            } else {
                Err(CliError::Invariant("matrix entries must be finite".into()))
            }
        })
        .collect()
}

pub fn parse_state(text: &str) -> Result<State, CliError> {
    let file: StateFile =
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("state file: {e}")))?;
    let n = checked_dim(&file.dims)?;
    let values = complex(&file.matrix)?;
    match file.kind {
        Kind::Pure => {
            if values.len() != n {
                return Err(CliError::Invariant(format!(
                    "pure state with dims {:?} needs {n} amplitudes, found {}",
                    file.dims,
                    values.len()
                )));
            }
            Ok(State::Pure(PureState::new(values, file.dims)?))
        }
        Kind::Density => {
            if values.len() != n * n {
                return Err(CliError::Invariant(format!(
                    "density matrix with dims {:?} needs {} entries, found {}",
                    file.dims,
                    n * n,
                    values.len()
                )));
            }
            let m = ComplexMatrix::from_vec(n, n, values)?;
            Ok(State::Density(DensityMatrix::new(m, file.dims)?))
        }
    }
}

type Op = Vec<[f64; 2]>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductOp {
    a: Op,
    b: Op,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum ChannelFile {
    Kraus {
        in_dims: Vec<usize>,
        out_dims: Vec<usize>,
        ops: Vec<Op>,
    },
    /// `in_dims` and `out_dims` list Alice's dims, then Bob's.
    Product {
        in_dims: [Vec<usize>; 2],
        out_dims: [Vec<usize>; 2],
        ops: Vec<ProductOp>,
    },
}

/// A channel as read from a file.
#[derive(Clone, Debug)]
pub enum Channel {
    Kraus(KrausChannel),
    Product(ProductKrausChannel),
}

fn matrix(op: &Op, rows: usize, cols: usize) -> Result<ComplexMatrix, CliError> {
    if op.len() != rows * cols {
        return Err(CliError::Invariant(format!(
            "operator has {} entries, expected {rows}x{cols}",
            op.len()
        )));
    }
    Ok(ComplexMatrix::from_vec(rows, cols, complex(op)?)?)
}

pub fn parse_channel(text: &str) -> Result<Channel, CliError> {
    let file: ChannelFile =
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("channel file: {e}")))?;
    match file {
        ChannelFile::Kraus { in_dims, out_dims, ops } => {
            let (n_in, n_out) = (checked_dim(&in_dims)?, checked_dim(&out_dims)?);
            if ops.is_empty() {
                return Err(CliError::Invariant("a channel needs at least one operator".into()));
            }
            let ops = ops
                .iter()
                .map(|op| matrix(op, n_out, n_in))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Channel::Kraus(KrausChannel::new(ops, in_dims, out_dims)?))
        }
        ChannelFile::Product { in_dims, out_dims, ops } => {
            let [a_in, b_in] = in_dims;
            let [a_out, b_out] = out_dims;
            let (na_in, na_out) = (checked_dim(&a_in)?, checked_dim(&a_out)?);
            let (nb_in, nb_out) = (checked_dim(&b_in)?, checked_dim(&b_out)?);
            if na_in.saturating_mul(nb_in) > MAX_DIM || na_out.saturating_mul(nb_out) > MAX_DIM {
                return Err(CliError::Invariant(format!("total dimension exceeds {MAX_DIM}")));
            }
            if ops.is_empty() {
                return Err(CliError::Invariant("a channel needs at least one operator pair".into()));
            }
            let pairs = ops
                .iter()
                .map(|p| Ok((matrix(&p.a, na_out, na_in)?, matrix(&p.b, nb_out, nb_in)?)))
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(Channel::Product(ProductKrausChannel::with_output_dims(
                pairs, a_in, a_out, b_in, b_out,
            )?))
        }
    }
}

fn write_ops(out: &mut String, ops: &[ComplexMatrix], indent: &str) {
    for (i, k) in ops.iter().enumerate() {
        out.push_str(if i == 0 { "\n" } else { ",\n" });
        out.push_str(indent);
        write_pairs(out, k.as_slice(), indent);
    }
}

pub fn channel_to_json(ch: &Channel) -> String {
    let mut out = String::new();
    match ch {
        Channel::Kraus(k) => {
            let _ = write!(
                out,
                "{{\n  \"kind\": \"kraus\",\n  \"in_dims\": {},\n  \"out_dims\": {},\n  \"ops\": [",
                write_dims(k.in_dims()),
                write_dims(k.out_dims())
            );
            write_ops(&mut out, k.ops(), "    ");
            out.push_str("\n  ]\n}\n");
        }
        Channel::Product(p) => {
            let _ = write!(
                out,
                "{{\n  \"kind\": \"product\",\n  \"in_dims\": [{}, {}],\n  \"out_dims\": [{}, {}],\n  \"ops\": [",
                write_dims(p.a_dims()),
                write_dims(p.b_dims()),
                write_dims(p.a_out_dims()),
                write_dims(p.b_out_dims())
            );
            for (i, (a, b)) in p.pairs().iter().enumerate() {
                out.push_str(if i == 0 { "\n" } else { ",\n" });
                out.push_str("    {\n      \"a\": ");
                write_pairs(&mut out, a.as_slice(), "      ");
                out.push_str(",\n      \"b\": ");
                write_pairs(&mut out, b.as_slice(), "      ");
                out.push_str("\n    }");
            }
            out.push_str("\n  ]\n}\n");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use coherlab::protocols::domino_channel;
    use coherlab::states::{bell_states, merging_state, random_density};

    #[test]
    fn number_format_is_canonical() {
        assert_eq!(fmt_num(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_num(-0.25), "-2.5000000000000000e-1");
        for x in [std::f64::consts::PI, 1.0 / 3.0, 1e-300, 6.02e23, 0.1 + 0.2] {
            assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn states_round_trip_byte_identically() {
        let states = [
            State::Pure(bell_states()[3].clone()),
            State::Density(merging_state()),
            State::Density(random_density(&[2, 3], 4, 7).unwrap()),
        ];
        for s in &states {
            let first = s.to_json();
            let second = parse_state(&first).unwrap().to_json();
            assert_eq!(first, second);
        }
    }

    #[test]
    fn channels_round_trip_byte_identically() {
        let ch = Channel::Product(domino_channel());
        let first = channel_to_json(&ch);
        assert_eq!(channel_to_json(&parse_channel(&first).unwrap()), first);
        let k = Channel::Kraus(KrausChannel::dephasing(&[2]));
        let first = channel_to_json(&k);
        assert_eq!(channel_to_json(&parse_channel(&first).unwrap()), first);
    }

    #[test]
    fn malformed_states_are_classified() {
        let cases = [
            ("{", true),
            (r#"{"dims":[2],"kind":"mixed","matrix":[]}"#, true),
            (r#"{"dims":[2],"kind":"pure","matrix":[[1,0]]}"#, false),
            (r#"{"dims":[2],"kind":"pure","matrix":[[1,0],[1,0]]}"#, false),
            (r#"{"dims":[2],"kind":"density","matrix":[[1,0],[1,0],[0,0],[0,0]]}"#, false),
            (r#"{"dims":[0],"kind":"pure","matrix":[]}"#, false),
            (r#"{"dims":[100000,100000],"kind":"pure","matrix":[]}"#, false),
        ];
        for (text, is_parse) in cases {
            match parse_state(text) {
                Err(CliError::Parse(_)) => assert!(is_parse, "{text}"),
                Err(CliError::Invariant(_)) => assert!(!is_parse, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn shipped_data_files_are_canonical() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
        let files = [
            ("domino.json", channel_to_json(&Channel::Product(domino_channel()))),
            ("bell.json", State::Pure(bell_states()[0].clone()).to_json()),
        ];
        for (name, expected) in files {
            let path = dir.join(name);
            if std::env::var_os("COHERLAB_BLESS").is_some() {
                std::fs::write(&path, &expected).unwrap();
            }
            let on_disk = std::fs::read_to_string(&path).unwrap();
            assert_eq!(on_disk, expected, "{name} is stale; rerun with COHERLAB_BLESS=1");
        }
    }
}
