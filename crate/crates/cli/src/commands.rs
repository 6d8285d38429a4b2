//! One function per subcommand. Each returns a [`Report`]; `main` renders it
//! and picks the exit code.

use serde_json::{json, Value};

use coherlab::channels::{
    average_leaves, classify_kraus, is_incoherent_operator, random_si_channel, random_sqi_channel, run_protocol,
    INCOHERENCE_TOL,
};
use coherlab::measures::{
    basis_dependent_discord, c_r, coherence_of_assistance, continuity_bound, dephase, mutual_information,
    qi_relative_entropy, Bipartition, MeasureReport, Method, DEFAULT_ASSISTANCE_BUDGET,
};
use coherlab::protocols::{
    ancilla_reduce, assisted_distill_mc, assisted_distill_pure, attach_ancillas, discriminate_domino,
    discriminate_domino_state, domino_channel, find_steering_measurement, incoherent_teleport, merging_witness,
    sqi_to_si_reduce, teleport_channel, teleport_instrument, DEFAULT_THETA_GRID,
};
use coherlab::qmat::{relative_entropy, trace_norm, von_neumann_entropy};
use coherlab::states::{
    bell_states, domino_states, maximally_coherent, maximally_correlated, merging_state, random_density, random_pure,
    random_qi_state,
};
use coherlab::{ComplexMatrix, DensityMatrix, PureState};

use crate::io::{Channel, State};
use crate::report::{density_json, rows_json, Report, Row};
use crate::CliError;

pub const MEASURES: [&str; 6] = ["cr", "qire", "discord", "mutual-info", "assistance", "entropy"];
pub const PROTOCOLS: [&str; 8] = [
    "teleport",
    "distill-pure",
    "distill-mc",
    "steer",
    "discriminate",
    "merge-witness",
    "sqi-to-si",
    "ancilla-reduce",
];
pub const SUITES: [&str; 8] = [
    "teleport",
    "steer",
    "monotonicity",
    "sqi-to-si",
    "ancilla-reduce",
    "continuity",
    "closed-form",
    "all",
];

/// Resolves `--builtin` names: `bell`, `merging`, `psi2`, `domino:k` (`k` in 1..=9).
pub fn builtin(name: &str) -> Result<State, CliError> {
    match name {
        "bell" => Ok(State::Pure(bell_states()[0].clone())),
        "merging" => Ok(State::Density(merging_state())),
        "psi2" => Ok(State::Pure(maximally_coherent(2)?)),
        _ => {
            let k = name
                .strip_prefix("domino:")
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|k| (1..=9).contains(k))
                .ok_or_else(|| {
                    CliError::Parse(format!(
                        "unknown builtin {name:?}; expected bell, merging, psi2 or domino:1..9"
                    ))
                })?;
            Ok(State::Pure(domino_states().states[k - 1].clone()))
        }
    }
}

fn builtin_index(name: Option<&str>) -> Option<usize> {
    name?.strip_prefix("domino:")?.parse().ok()
}

/// Common options threaded through the subcommands.
pub struct Options {
    pub state: Option<State>,
    pub builtin: Option<String>,
    pub split: Option<String>,
    pub channel: Option<Channel>,
    pub trials: Option<usize>,
    pub seed: u64,
    pub tol: Option<f64>,
}

impl Options {
    fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    fn state_or(&self, default: &str) -> Result<State, CliError> {
        match &self.state {
            Some(s) => Ok(s.clone()),
            None => builtin(default),
        }
    }

    fn require_state(&self, command: &str) -> Result<&State, CliError> {
        self.state
            .as_ref()
            .ok_or_else(|| CliError::Parse(format!("{command} needs --state PATH or --builtin NAME")))
    }

    fn source(&self) -> String {
        self.builtin.clone().unwrap_or_else(|| "file".into())
    }

    fn split_for(&self, rho: &DensityMatrix) -> Result<Bipartition, CliError> {
        let count = rho.dims().len();
        match &self.split {
            Some(spec) => Bipartition::parse(spec, count).map_err(|e| CliError::Parse(e.to_string())),
            None => match count {
                1 => Ok(Bipartition::new(&[], &[0], 1)?),
                2 => Ok(Bipartition::two_party()),
                _ => Err(CliError::Parse(format!(
                    "state has {count} subsystems; pass --split \"A=..;B=..\""
                ))),
            },
        }
    }
}

fn split_label(split: &Bipartition) -> String {
    let list = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    format!("A={};B={}", list(split.a()), list(split.b()))
}

pub fn measure(name: &str, opts: &Options) -> Result<Report, CliError> {
    let state = opts.require_state("measure")?;
    let rho = state.density();
    let report = match name {
        "cr" => MeasureReport::new("cr", c_r(&rho)?, Method::ClosedForm),
        "entropy" => MeasureReport::new("entropy", von_neumann_entropy(&rho)?, Method::ClosedForm),
        "qire" | "discord" | "mutual-info" => {
            let split = opts.split_for(&rho)?;
            let value = match name {
                "qire" => qi_relative_entropy(&rho, &split)?,
                "discord" => basis_dependent_discord(&rho, &split)?,
                _ => mutual_information(&rho, &split)?,
            };
            MeasureReport::new(name, value, Method::ClosedForm).with_input("split", split_label(&split))
        }
        "assistance" => {
            let (target, split) = match &opts.split {
                Some(_) => {
                    let split = opts.split_for(&rho)?;
                    (rho.partial_trace(split.b())?, Some(split_label(&split)))
                }
                None => (rho.clone(), None),
            };
            let budget = opts.trials.unwrap_or(DEFAULT_ASSISTANCE_BUDGET);
            let a = coherence_of_assistance(&target, budget, opts.seed)?;
            let mut r = MeasureReport::new("assistance", a.value, Method::Optimized)
                .with_input("seed", opts.seed.to_string())
                .with_input("budget", budget.to_string());
            if let Some(s) = split {
                r = r.with_input("split", s);
            }
            r
        }
        other => {
            return Err(CliError::Parse(format!(
                "unknown measure {other:?}; expected one of {}",
                MEASURES.join(", ")
            )))
        }
    };
    let report = report.with_input("state", opts.source());
    Ok(Report {
        title: format!("measure {name}"),
        rows: vec![Row::info(name, report.value)],
        json: serde_json::to_value(&report).unwrap_or(Value::Null),
    })
}

fn protocol_report(name: &str, rows: Vec<Row>, extra: Value) -> Report {
    let mut json = json!({ "protocol": name, "checks": rows_json(&rows) });
    if let (Value::Object(map), Value::Object(more)) = (&mut json, extra) {
        map.extend(more);
    }
    Report {
        title: format!("protocol {name}"),
        rows,
        json,
    }
}

fn outcomes_json(leaves: &[coherlab::channels::Leaf]) -> Value {
    Value::Array(
        leaves
            .iter()
            .map(|l| {
                json!({
                    "probability": l.probability,
                    "transcript": l.transcript,
                    "label": l.label,
                    "state": density_json(&l.state),
                })
            })
            .collect(),
    )
}

fn matrix_json(m: &ComplexMatrix) -> Value {
    json!({
        "rows": m.rows(),
        "cols": m.cols(),
        "entries": m.as_slice().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
    })
}

fn pure_of(state: &State, what: &str) -> Result<PureState, CliError> {
    match state {
        State::Pure(psi) => Ok(psi.clone()),
        State::Density(_) => Err(CliError::Invariant(format!("{what} needs a pure state (kind \"pure\")"))),
    }
}

pub fn protocol(name: &str, opts: &Options) -> Result<Report, CliError> {
    match name {
        "teleport" => teleport(opts),
        "distill-pure" => {
            let psi = pure_of(&opts.state_or("bell")?, "distill-pure")?;
            let budget = opts.trials.unwrap_or(DEFAULT_ASSISTANCE_BUDGET);
            let r = assisted_distill_pure(&psi, None, budget, opts.seed)?;
            let rho_b = psi.to_density().partial_trace(&[1])?;
            let ceiling = von_neumann_entropy(&dephase(&rho_b, &[0])?)?;
            let avg = r.metrics["average_coherence"];
            let rows = vec![
                Row::check("average_coherence", avg, r.metrics["ensemble_coherence"], opts.tol(1e-9)),
                Row::at_most("average_coherence_vs_dephased_entropy", avg, ceiling + opts.tol(1e-9)),
                Row::info("ensemble_gap", r.metrics["ensemble_gap"]),
            ];
            Ok(protocol_report(
                name,
                rows,
                json!({ "method": Method::Optimized, "seed": opts.seed, "budget": budget, "outcomes": outcomes_json(&r.outcomes) }),
            ))
        }
        "distill-mc" => {
            let rho = opts.state_or("bell")?.density();
            let r = assisted_distill_mc(&rho, None)?;
            let tol = opts.tol(1e-9);
            let rows = vec![
                Row::info("target", r.metrics["target"]),
                Row::at_most("max_deviation", r.metrics["max_deviation"], tol),
                Row::at_most("max_correction_error", r.metrics["max_correction_error"], tol),
            ];
            let corrections: Vec<Value> = r.corrections.iter().map(matrix_json).collect();
            Ok(protocol_report(
                name,
                rows,
                json!({ "outcomes": outcomes_json(&r.outcomes), "corrections": corrections }),
            ))
        }
        "steer" => {
            let rho = opts.state_or("bell")?.density();
            let bob: Vec<usize> = (1..rho.dims().len()).collect();
            let distance = trace_norm(&(rho.matrix() - dephase(&rho, &bob)?.matrix()))?;
            let witness = find_steering_measurement(&rho, DEFAULT_THETA_GRID)?;
            let mut rows = vec![
                Row::info("distance_to_dephased", distance),
                Row::info("witness_found", f64::from(u8::from(witness.is_some()))),
            ];
            let extra = match &witness {
                Some(w) => {
                    rows.push(Row::info("probability", w.probability));
                    rows.push(Row::info("bob_coherence", w.bob_coherence));
                    rows.push(Row::flag(
                        "kraus_op_incoherent",
                        is_incoherent_operator(&w.kraus_op, INCOHERENCE_TOL),
                        true,
                    ));
                    json!({
                        "witness": {
                            "kraus_op": matrix_json(&w.kraus_op),
                            "probability": w.probability,
                            "bob_coherence": w.bob_coherence,
                            "bob_post_state": density_json(&w.bob_post_state),
                        }
                    })
                }
                None => json!({ "witness": null }),
            };
            Ok(protocol_report(name, rows, extra))
        }
        "discriminate" => discriminate(opts),
        "merge-witness" => {
            let w = merging_witness()?;
            let tol = opts.tol(1e-9);
            let rows = vec![
                Row::check("qire_R|AB", w.r_ab.value, 8.0 / 9.0, tol),
                Row::check("qire_RB|A", w.rb_a.value, 4.0 / 9.0, tol),
                Row::flag("contradiction", w.contradiction, true),
                Row::at_most("merge_gap", w.merge_gap, tol),
                Row::flag("merge_sqi", w.merge_class.separable_quantum_incoherent, true),
                Row::flag("merge_si", w.merge_class.separable_incoherent, false),
            ];
            Ok(protocol_report(
                name,
                rows,
                json!({ "witness": serde_json::to_value(&w).unwrap_or(Value::Null) }),
            ))
        }
        "sqi-to-si" => sqi_to_si(opts),
        "ancilla-reduce" => {
            let trials = opts.trials.unwrap_or(100);
            let mut gap: f64 = 0.0;
            let mut incoherent = true;
            for t in 0..trials as u64 {
                let s = opts.seed.wrapping_add(t);
                let (g, ok) = ancilla_trial(s)?;
                gap = gap.max(g);
                incoherent &= ok;
            }
            let rows = vec![
                Row::at_most("max_trace_norm_gap", gap, opts.tol(1e-9)),
                Row::flag("reduced_operators_incoherent", incoherent, true),
            ];
            Ok(protocol_report(name, rows, json!({ "trials": trials, "seed": opts.seed })))
        }
        other => Err(CliError::Parse(format!(
            "unknown protocol {other:?}; expected one of {}",
            PROTOCOLS.join(", ")
        ))),
    }
}

fn teleport(opts: &Options) -> Result<Report, CliError> {
    let tol = opts.tol(1e-9);
    let ops_ok = teleport_instrument()
        .ops()
        .iter()
        .all(|k| is_incoherent_operator(k, INCOHERENCE_TOL));
    let mut extra = json!({});
    let inputs: Vec<PureState> = match &opts.state {
        Some(State::Pure(psi)) => vec![psi.clone()],
        Some(State::Density(rho)) => {
            let out = teleport_channel(rho)?;
            let gap = trace_norm(&(out.matrix() - rho.matrix()))?;
            let rows = vec![
                Row::at_most("channel_trace_norm_gap", gap, tol),
                Row::flag("alice_kraus_incoherent", ops_ok, true),
            ];
            return Ok(protocol_report("teleport", rows, json!({ "output": density_json(&out) })));
        }
        None => {
            let trials = opts.trials.unwrap_or(100);
            extra = json!({ "input": "random", "trials": trials, "seed": opts.seed });
            (0..trials as u64)
                .map(|t| random_pure(&[2], opts.seed.wrapping_add(t)))
                .collect::<Result<_, _>>()?
        }
    };
    let mut min_fid = f64::INFINITY;
    let mut prob_err: f64 = 0.0;
    let mut last = None;
    for psi in &inputs {
        let r = incoherent_teleport(psi)?;
        min_fid = min_fid.min(r.metrics["min_fidelity"]);
        prob_err = prob_err.max(r.metrics["max_probability_error"]);
        last = Some(r);
    }
    if let (1, Some(r), Value::Object(map)) = (inputs.len(), &last, &mut extra) {
        map.insert("outcomes".into(), outcomes_json(&r.outcomes));
    }
    let rows = vec![
        Row::check("min_fidelity", min_fid, 1.0, tol),
        Row::at_most("max_probability_error", prob_err, tol),
        Row::flag("alice_kraus_incoherent", ops_ok, true),
    ];
    Ok(protocol_report("teleport", rows, extra))
}

fn discriminate(opts: &Options) -> Result<Report, CliError> {
    let tol = opts.tol(1e-9);
    let ch = domino_channel();
    let class = ch.classify(INCOHERENCE_TOL);
    let mut rows = vec![
        Row::at_most("completeness_residual", ch.completeness_residual(), tol),
        Row::flag("si", class.separable_incoherent, true),
        Row::flag("sqi", class.separable_quantum_incoherent, true),
    ];
    let mut extra = json!({});
    match (&opts.state, builtin_index(opts.builtin.as_deref())) {
        (_, Some(k)) => {
            let r = discriminate_domino(k)?;
            rows.push(Row::check(format!("success_probability_{k}"), r.metrics["success_probability"], 1.0, tol));
            rows.push(Row::check(format!("post_state_fidelity_{k}"), r.metrics["post_state_fidelity"], 1.0, tol));
            extra = json!({ "input": k, "outcomes": outcomes_json(&r.outcomes) });
        }
        (Some(state), None) => {
            let rho = state.density();
            if rho.dims() != [3, 3] {
                return Err(CliError::Invariant(format!(
                    "discrimination acts on two qutrits, got dims {:?}",
                    rho.dims()
                )));
            }
            let r = discriminate_domino_state(&rho)?;
            for k in 1..=9 {
                rows.push(Row::info(format!("outcome_{k}"), r.metrics[&format!("outcome_{k}")]));
            }
        }
        (None, None) => {
            for k in 1..=9 {
                let r = discriminate_domino(k)?;
                rows.push(Row::check(format!("success_probability_{k}"), r.metrics["success_probability"], 1.0, tol));
            }
        }
    }
    Ok(protocol_report("discriminate", rows, extra))
}

fn sqi_to_si(opts: &Options) -> Result<Report, CliError> {
    let trials = opts.trials.unwrap_or(100);
    let mut gap: f64 = 0.0;
    let mut all_si = true;
    let mut extra = json!({ "trials": trials, "seed": opts.seed });
    match &opts.channel {
        Some(Channel::Product(ch)) => {
            let reduced = sqi_to_si_reduce(ch)?;
            all_si = reduced.classify(INCOHERENCE_TOL).separable_incoherent;
            let dims: Vec<usize> = ch.a_dims().iter().chain(ch.b_dims()).copied().collect();
            let bob_out: Vec<usize> = (ch.a_out_dims().len()..ch.a_out_dims().len() + ch.b_out_dims().len()).collect();
            let n: usize = dims.iter().product();
            for t in 0..trials as u64 {
                let rho = random_density(&dims, n, opts.seed.wrapping_add(t))?;
                let before = ch.apply(&rho)?.partial_trace(&bob_out)?;
                let after = reduced.apply(&rho)?.partial_trace(&bob_out)?;
                gap = gap.max(trace_norm(&(before.matrix() - after.matrix()))?);
            }
            extra["reduced_pairs"] = json!(reduced.pairs().len());
        }
        Some(Channel::Kraus(_)) => {
            return Err(CliError::Invariant(
                "sqi-to-si needs a product channel (kind \"product\")".into(),
            ))
        }
        None => {
            for t in 0..trials as u64 {
                let (g, si) = sqi_trial(opts.seed.wrapping_add(t))?;
                gap = gap.max(g);
                all_si &= si;
            }
        }
    }
    let rows = vec![
        Row::at_most("max_bob_marginal_gap", gap, opts.tol(1e-9)),
        Row::flag("reduced_is_si", all_si, true),
    ];
    Ok(protocol_report("sqi-to-si", rows, extra))
}

fn sqi_trial(seed: u64) -> Result<(f64, bool), CliError> {
    let ch = random_sqi_channel(&[2], &[2], 2, seed)?.to_product_channel()?;
    let reduced = sqi_to_si_reduce(&ch)?;
    let rho = random_density(&[2, 2], 4, seed ^ 0x9e37_79b9)?;
    let before = ch.apply(&rho)?.partial_trace(&[1])?;
    let after = reduced.apply(&rho)?.partial_trace(&[1])?;
    Ok((
        trace_norm(&(before.matrix() - after.matrix()))?,
        reduced.classify(INCOHERENCE_TOL).separable_incoherent,
    ))
}

fn ancilla_trial(seed: u64) -> Result<(f64, bool), CliError> {
    let tilde = random_si_channel(&[2, 2], &[2, 2], seed)?;
    let reduced = ancilla_reduce(&tilde, &[2], &[2])?;
    let rho = random_density(&[2, 2], 4, seed ^ 0x9e37_79b9)?;
    let expected = tilde
        .apply(&attach_ancillas(&rho, 1, &[2], &[2])?)?
        .partial_trace(&[0, 2])?;
    let got = reduced.apply(&rho)?;
    let ok = reduced
        .pairs()
        .iter()
        .all(|(a, b)| is_incoherent_operator(a, INCOHERENCE_TOL) && is_incoherent_operator(b, INCOHERENCE_TOL));
    Ok((trace_norm(&(expected.matrix() - got.matrix()))?, ok))
}

pub fn classify(ch: &Channel) -> Result<Report, CliError> {
    let (class, residual) = match ch {
        Channel::Product(p) => (p.classify(INCOHERENCE_TOL), p.completeness_residual()),
        Channel::Kraus(k) => (classify_kraus(k, INCOHERENCE_TOL), k.completeness_residual()),
    };
    let flag = |b: bool| f64::from(u8::from(b));
    let rows = vec![
        Row::info("incoherent", flag(class.incoherent)),
        Row::info("separable", flag(class.separable)),
        Row::info("si", flag(class.separable_incoherent)),
        Row::info("sqi", flag(class.separable_quantum_incoherent)),
        Row::info("completeness_residual", residual),
    ];
    Ok(Report {
        title: "classify".into(),
        rows,
        json: serde_json::to_value(class).unwrap_or(Value::Null),
    })
}

/// Every value stated in closed form, recomputed.
pub fn reproduce(opts: &Options) -> Result<Report, CliError> {
    let tol = opts.tol(1e-9);
    let mut rows = vec![Row::check("C_r(Psi_2)", c_r(&maximally_coherent(2)?.to_density())?, 1.0, tol)];

    let w = merging_witness()?;
    rows.push(Row::check("merging C_r^{R|AB}", w.r_ab.value, 8.0 / 9.0, tol));
    rows.push(Row::check("merging C_r^{RB|A}", w.rb_a.value, 4.0 / 9.0, tol));
    rows.push(Row::flag("merging C_r^{R|AB} > C_r^{RB|A}", w.contradiction, true));
    rows.push(Row::at_most("merging SQI protocol trace-norm gap", w.merge_gap, tol));
    rows.push(Row::flag("merging operation is SQI", w.merge_class.separable_quantum_incoherent, true));

    let dom = domino_channel();
    rows.push(Row::at_most("domino completeness residual", dom.completeness_residual(), tol));
    let class = dom.classify(INCOHERENCE_TOL);
    rows.push(Row::flag("domino channel is SI", class.separable_incoherent, true));
    rows.push(Row::flag("domino channel is SQI", class.separable_quantum_incoherent, true));
    for k in 1..=9 {
        let r = discriminate_domino(k)?;
        rows.push(Row::check(
            format!("domino state {k} identified"),
            r.metrics["success_probability"],
            1.0,
            tol,
        ));
    }

    let paulis_incoherent = crate_paulis().iter().all(|p| is_incoherent_operator(p, INCOHERENCE_TOL));
    rows.push(Row::flag("Pauli matrices are incoherent", paulis_incoherent, true));
    let mut min_fid = f64::INFINITY;
    let mut prob_err: f64 = 0.0;
    for t in 0..100u64 {
        let r = incoherent_teleport(&random_pure(&[2], opts.seed.wrapping_add(t))?)?;
        min_fid = min_fid.min(r.metrics["min_fidelity"]);
        prob_err = prob_err.max(r.metrics["max_probability_error"]);
    }
    rows.push(Row::check("teleportation fidelity (min over 100 qubits)", min_fid, 1.0, tol));
    rows.push(Row::at_most("teleportation outcome probability error", prob_err, tol));

    let bell_mc = assisted_distill_mc(&bell_states()[0].to_density(), None)?;
    rows.push(Row::check(
        "Bell state: distilled coherence per outcome",
        bell_mc.metrics["target"],
        1.0,
        tol,
    ));
    let qi = random_qi_state(2, 2, opts.seed)?;
    rows.push(Row::flag(
        "QI state admits no steering witness",
        find_steering_measurement(&qi, DEFAULT_THETA_GRID)?.is_none(),
        true,
    ));

    Ok(Report {
        title: "reproduced values".into(),
        json: json!({ "seed": opts.seed, "rows": rows_json(&rows) }),
        rows,
    })
}

fn crate_paulis() -> Vec<ComplexMatrix> {
    use num_complex::Complex64 as C64;
    let (z, o, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
    let m = |v: [C64; 4]| ComplexMatrix::from_vec(2, 2, v.to_vec()).expect("2x2");
    vec![m([z, o, o, z]), m([z, -i, i, z]), m([o, z, z, -o])]
}

type Property = fn(u64) -> Result<bool, CliError>;

fn prop_teleport(seed: u64) -> Result<bool, CliError> {
    let r = incoherent_teleport(&random_pure(&[2], seed)?)?;
    Ok(r.metrics["min_fidelity"] >= 1.0 - 1e-9 && r.metrics["max_probability_error"] <= 1e-9)
}

fn prop_steer_non_qi(seed: u64) -> Result<bool, CliError> {
    let rho = random_density(&[2, 2], 1 + (seed % 4) as usize, seed)?;
    let distance = trace_norm(&(rho.matrix() - dephase(&rho, &[1])?.matrix()))?;
    let found = find_steering_measurement(&rho, DEFAULT_THETA_GRID)?.is_some();
    Ok(found == (distance > 1e-3) || distance <= 1e-3)
}

fn prop_steer_qi(seed: u64) -> Result<bool, CliError> {
    Ok(find_steering_measurement(&random_qi_state(2, 2, seed)?, DEFAULT_THETA_GRID)?.is_none())
}

fn prop_monotonicity(seed: u64) -> Result<bool, CliError> {
    let split = Bipartition::two_party();
    let rho = random_density(&[2, 2], 1 + (seed % 4) as usize, seed)?;
    let p = random_sqi_channel(&[2], &[2], 1 + (seed % 3) as usize, seed ^ 0x5bd1_e995)?;
    let out = average_leaves(&run_protocol(&p, &rho)?)?;
    Ok(qi_relative_entropy(&out, &split)? <= qi_relative_entropy(&rho, &split)? + 1e-9)
}

fn prop_sqi_to_si(seed: u64) -> Result<bool, CliError> {
    let (gap, si) = sqi_trial(seed)?;
    Ok(gap <= 1e-9 && si)
}

fn prop_ancilla(seed: u64) -> Result<bool, CliError> {
    let (gap, ok) = ancilla_trial(seed)?;
    Ok(gap <= 1e-9 && ok)
}

fn prop_continuity(seed: u64) -> Result<bool, CliError> {
    let rho = random_density(&[2, 2], 1 + (seed % 4) as usize, seed)?;
    let tau = random_density(&[2, 2], 4, seed ^ 0x27d4_eb2d)?;
    let s = 0.5 * ((seed % 50) as f64 + 1.0) / 50.0;
    let sigma = DensityMatrix::mixture(&[(1.0 - s, &rho), (s, &tau)])?;
    let c = continuity_bound(&rho, &sigma, &Bipartition::two_party())?;
    Ok(c.difference <= c.bound + 1e-12)
}

fn prop_closed_form(seed: u64) -> Result<bool, CliError> {
    let shapes = [[2, 2], [2, 3], [3, 2], [3, 3]];
    let dims = shapes[(seed % 4) as usize];
    let rho = random_density(&dims, dims[0] * dims[1], seed)?;
    let via = relative_entropy(&rho, &dephase(&rho, &[1])?)?;
    Ok((via - qi_relative_entropy(&rho, &Bipartition::two_party())?).abs() <= 1e-9)
}

fn prop_mc(seed: u64) -> Result<bool, CliError> {
    let coeffs = random_density(&[3], 3, seed)?.into_matrix();
    let r = assisted_distill_mc(&maximally_correlated(&coeffs)?, None)?;
    Ok(r.metrics["max_deviation"] <= 1e-9)
}

fn suite_properties(name: &str) -> Result<Vec<(&'static str, Property)>, CliError> {
    let all: Vec<(&'static str, &'static str, Property)> = vec![
        ("teleport", "teleport_fidelity", prop_teleport),
        ("steer", "steer_witness_iff_not_qi", prop_steer_non_qi),
        ("steer", "steer_none_for_qi", prop_steer_qi),
        ("monotonicity", "sqi_monotonicity", prop_monotonicity),
        ("monotonicity", "mc_distillation", prop_mc),
        ("sqi-to-si", "sqi_to_si_marginal", prop_sqi_to_si),
        ("ancilla-reduce", "ancilla_reduction", prop_ancilla),
        ("continuity", "continuity_bound", prop_continuity),
        ("closed-form", "closed_form_vs_divergence", prop_closed_form),
    ];
    if !SUITES.contains(&name) {
        return Err(CliError::Parse(format!(
            "unknown suite {name:?}; expected one of {}",
            SUITES.join(", ")
        )));
    }
    Ok(all
        .into_iter()
        .filter(|(suite, _, _)| name == "all" || *suite == name)
        .map(|(_, prop, f)| (prop, f))
        .collect())
}

/// Runs `trials` seeded trials of every property in the suite. Trial `t`
/// uses seed `seed + t`, so a failure is reproduced with
/// `--seed <reported> --trials 1`.
pub fn suite(name: &str, opts: &Options) -> Result<Report, CliError> {
    let trials = opts.trials.unwrap_or(100);
    if trials == 0 {
        return Err(CliError::Parse("--trials must be at least 1".into()));
    }
    let mut rows = Vec::new();
    let mut props = Vec::new();
    for (prop, f) in suite_properties(name)? {
        let mut failures = Vec::new();
        let mut errors = Vec::new();
        for t in 0..trials as u64 {
            let s = opts.seed.wrapping_add(t);
            match f(s) {
                Ok(true) => {}
                Ok(false) => failures.push(s),
                Err(e) => {
                    failures.push(s);
                    errors.push(format!("seed {s}: {e}"));
                }
            }
        }
        rows.push(Row::at_most(format!("{prop}.failures"), failures.len() as f64, 0.0));
        props.push(json!({
            "name": prop,
            "passed": trials - failures.len(),
            "failed": failures.len(),
            "failure_seeds": failures,
            "errors": errors,
        }));
    }
    Ok(Report {
        title: format!("suite {name}: {trials} trials from seed {}", opts.seed),
        json: json!({ "suite": name, "trials": trials, "seed": opts.seed, "properties": props }),
        rows,
    })
}
