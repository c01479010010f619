//! Commands over a parsed scenario.  Each command returns a text report
//! and CSV file contents; nothing here touches the file system.

use std::fmt::Write as _;

use num_rational::Rational64;
use thiserror::Error;

use crate::born::{self, check_transition_symmetry, transition_matrix, BornError};
use crate::group::{orbits, FiniteGroup, GroupAction, Permutation};
use crate::hilbert::verify_subspace_transport;
use crate::inference::{
    bayes_update, exact_outcome_count, four_sigma, simulate, simulate_lifetimes, to_f64, ExperimentModel, Posterior,
    Trace, RNG_ALGORITHM,
};
use crate::linalg::{self, HermitianEigen};
use crate::params::{element_violation, find_permissibility_violation};
use crate::reduction::{orbit_closure_check, randomization_strata, zero_pattern_orbits, SignAtom};
use crate::scenario::ScenarioSpec;
use crate::states::{
    check_state_assumptions, decompose, identify_question, parameter_operator, question_from_state,
    state_from_question, StateError,
};
use crate::system::{
    design_spec, experiment_model, scenario_group, ParameterSystem, QuantumSystem, RepMode, SystemError,
    ToleranceProfile, Tolerances,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Validate,
    Build,
    Born { a: String, b: String },
    States,
    Simulate,
    Reduce,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineOptions {
    pub seed: u64,
    pub n: usize,
    pub experiment: Option<String>,
    pub base: Option<String>,
    pub profile: ToleranceProfile,
    /// Trials per apparatus lifetime; the whole run by default.
    pub lifetime: Option<usize>,
    pub hypothesis: Option<String>,
    /// Coordinate count for the sign-pattern census.
    pub zero_pattern: Option<usize>,
    pub mode: RepMode,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            seed: 1,
            n: 1000,
            experiment: None,
            base: None,
            profile: ToleranceProfile::Default,
            lifetime: None,
            hypothesis: None,
            zero_pattern: None,
            mode: RepMode::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub report: String,
    /// `(file name, contents)` in a fixed order.
    pub files: Vec<(String, String)>,
    /// Every check the command performed passed.
    pub passed: bool,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Born(#[from] BornError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("{0}")]
    Usage(String),
}

impl From<crate::inference::InferenceError> for PipelineError {
    fn from(e: crate::inference::InferenceError) -> Self {
        PipelineError::System(e.into())
    }
}

impl From<crate::reduction::ReductionError> for PipelineError {
    fn from(e: crate::reduction::ReductionError) -> Self {
        PipelineError::System(e.into())
    }
}

/// Twelve significant digits; scientific notation for very small or very
/// large magnitudes.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-4..12).contains(&exp) {
        let s = format!("{x:.11e}");
        let (mantissa, e) = s.split_once('e').expect("exponent present");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{mantissa}e{e}");
    }
    let decimals = (11 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn fmt_rational(r: Rational64) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

#[derive(Default)]
struct Report {
    text: String,
    passed: bool,
    checks: usize,
}

impl Report {
    fn new() -> Self {
        Report { text: String::new(), passed: true, checks: 0 }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    fn check(&mut self, label: &str, ok: bool, detail: impl AsRef<str>) {
        self.checks += 1;
        self.passed &= ok;
        let detail = detail.as_ref();
        if detail.is_empty() {
            self.line(format!("[{}] {label}", verdict(ok)));
        } else {
            self.line(format!("[{}] {label}: {detail}", verdict(ok)));
        }
    }

    fn finish(self, files: Vec<(String, String)>) -> Outcome {
        Outcome { report: self.text, files, passed: self.passed }
    }
}

/// Cycle notation with point labels.
pub fn cycle_string(p: &Permutation, labels: &[String]) -> String {
    let mut seen = vec![false; p.degree()];
    let mut out = String::new();
    for start in 0..p.degree() {
        if seen[start] || p.apply(start) == start {
            continue;
        }
        out.push('(');
        let mut x = start;
        let mut first = true;
        while !seen[x] {
            seen[x] = true;
            if !first {
                out.push(' ');
            }
            out.push_str(&labels[x]);
            first = false;
            x = p.apply(x);
        }
        out.push(')');
    }
    if out.is_empty() {
        "()".into()
    } else {
        out
    }
}

fn labels(spec: &ScenarioSpec) -> Vec<String> {
    spec.phi.iter().map(|p| p.label.clone()).collect()
}

pub fn run_pipeline(
    command: &Command,
    spec: &ScenarioSpec,
    options: &PipelineOptions,
) -> Result<Outcome, PipelineError> {
    let tol = Tolerances::for_profile(options.profile);
    match command {
        Command::Validate => validate(spec, options, &tol),
        Command::Build => build(spec, options, &tol),
        Command::Born { a, b } => born_command(spec, options, &tol, a, b),
        Command::States => states(spec, options, &tol),
        Command::Simulate => simulate_command(spec, options),
        Command::Reduce => reduce(spec, options, &tol),
    }
}

fn quantum(spec: &ScenarioSpec, options: &PipelineOptions, tol: &Tolerances) -> Result<QuantumSystem, PipelineError> {
    let params = ParameterSystem::new(spec.clone(), options.base.as_deref())?;
    Ok(QuantumSystem::build(params, options.mode, *tol)?)
}

fn validate(spec: &ScenarioSpec, options: &PipelineOptions, tol: &Tolerances) -> Result<Outcome, PipelineError> {
    let mut r = Report::new();
    r.line(format!("scenario: {}", spec.name));
    r.line(format!("points: {}", spec.phi.len()));
    if !spec.parameters.is_empty() {
        validate_parameters(spec, options, tol, &mut r)?;
    }
    if !spec.experiments.is_empty() {
        let model = experiment_model(spec)?;
        describe_model(spec, &model, &mut r)?;
    }
    if spec.design.is_some() {
        let design = design_spec(spec)?;
        let strata = randomization_strata(&design)?;
        r.line(format!("design: {} units in {} blocks", design.len(), design.blocks.len()));
        r.line(format!(
            "block-respecting group transitive on units: {}",
            if strata.transitive() { "yes" } else { "no (strata are still computed)" }
        ));
    }
    Ok(r.finish(Vec::new()))
}

fn validate_parameters(
    spec: &ScenarioSpec,
    options: &PipelineOptions,
    tol: &Tolerances,
    r: &mut Report,
) -> Result<(), PipelineError> {
    let params = ParameterSystem::new(spec.clone(), options.base.as_deref())?;
    let names = labels(spec);
    let group = &params.group;
    r.line(format!("group order: {}", group.order()));
    r.line(format!("base experiment: {}", params.maps[params.base].name()));
    let report = &params.assumptions;
    for (map, check) in params.maps.iter().zip(&report.experiments) {
        r.line(format!(
            "experiment {}: {} values, maximal permissible subgroup of order {}",
            map.name(),
            map.num_values(),
            check.subgroup.order()
        ));
        match find_permissibility_violation(map, group) {
            None => r.line("  permissible under the full group"),
            Some(w) => {
                let g = group.element(w.element);
                let v = |p: usize| map.values()[map.value_of(p)].as_str();
                r.line(format!(
                    "  not permissible under the full group: {} and {} both give {}, but under {} they give {} and {}",
                    names[w.first],
                    names[w.second],
                    v(w.first),
                    cycle_string(g, &names),
                    v(g.apply(w.first)),
                    v(g.apply(w.second))
                ));
            }
        }
        let elements: Vec<String> =
            (0..check.subgroup.order()).map(|i| cycle_string(check.subgroup.element(i), &names)).collect();
        r.line(format!("  subgroup elements: {}", elements.join(" ")));
        let orbit_text: Vec<String> = check
            .value_orbits
            .blocks()
            .iter()
            .map(|b| format!("{{{}}}", b.iter().map(|&v| map.values()[v].as_str()).collect::<Vec<_>>().join(" ")))
            .collect();
        r.check(
            &format!("A {}: values form one orbit", map.name()),
            check.single_orbit(),
            format!("orbits {}", orbit_text.join(" ")),
        );
    }
    r.check(
        "B: experiment subgroups generate the group",
        report.generation_holds(),
        format!("{} of {} elements", report.generated_order, report.group_order),
    );
    match &report.transitions {
        Ok(family) => {
            r.check("C: transition family with g_ab g_bc = g_ac", true, "");
            for a in 0..family.len() {
                for b in 0..family.len() {
                    if a != b {
                        r.line(format!(
                            "  g[{}->{}] = {}",
                            params.maps[a].name(),
                            params.maps[b].name(),
                            cycle_string(group.element(family.get(a, b)), &names)
                        ));
                    }
                }
            }
        }
        Err(failure) => r.check("C: transition family with g_ab g_bc = g_ac", false, failure.to_string()),
    }
    if !(report.generation_holds() && report.transitions_hold()) {
        r.line("W not constructed: requires B and C");
        return Ok(());
    }
    let sys = match QuantumSystem::build(params, options.mode, *tol) {
        Ok(sys) => sys,
        Err(e) => {
            r.check("D: W well defined on the base space", false, e.to_string());
            return Ok(());
        }
    };
    r.check(
        "D: W well defined on the base space",
        true,
        format!(
            "{} representation, homomorphism residual {}",
            origin_name(&sys),
            fmt_num(sys.w_check.homomorphism_residual)
        ),
    );
    let v0 = state_from_question(&sys.states, sys.params.base, 0)?;
    let st = check_state_assumptions(&sys.w, &v0, &sys.states, tol.gcs);
    let missing: Vec<String> = st
        .coverage_missing
        .iter()
        .map(|&(a, k)| format!("{}={}", sys.states.names()[a], sys.states.values(a)[k]))
        .collect();
    r.check(
        "E (surrogate): orbit of the base state contains every eigenbasis state",
        st.coverage_surrogate(),
        if missing.is_empty() { String::new() } else { format!("missing {}", missing.join(" ")) },
    );
    r.check(
        "F: g -> W(g)v0 injective up to phase",
        st.injective(),
        match st.injectivity_witness {
            Some((g, h)) => format!(
                "elements {} and {} give the same state; orbit has {} of {} states",
                cycle_string(sys.params.group.element(g), &names),
                cycle_string(sys.params.group.element(h), &names),
                st.orbit_size,
                st.group_order
            ),
            None => format!("orbit has {} states", st.orbit_size),
        },
    );
    let all: Vec<_> = sys.states.all_states().cloned().collect();
    let sym = check_transition_symmetry(&sys.w, &all, tol.symmetry);
    r.check(
        "G: transition probabilities invariant under W",
        sym.holds(),
        format!("max deviation {}", fmt_num(sym.max_deviation)),
    );
    Ok(())
}

fn origin_name(sys: &QuantumSystem) -> &'static str {
    match sys.w.origin() {
        crate::hilbert::RepOrigin::Derived => "derived",
        crate::hilbert::RepOrigin::Explicit { projective: true } => "explicit projective",
        crate::hilbert::RepOrigin::Explicit { projective: false } => "explicit",
    }
}

fn describe_model(spec: &ScenarioSpec, model: &ExperimentModel, r: &mut Report) -> Result<(), PipelineError> {
    for (e, exp) in model.experiments().iter().enumerate() {
        for (h, hyp) in model.hypotheses().iter().enumerate() {
            let p = model.probability(e, h);
            let counted = match (exp.fixed.get(h).copied().flatten(), hyp.apparatus) {
                (None, Some(app)) => {
                    let (hits, total) = exact_outcome_count(&app, exp.statistic)?;
                    format!(" ({hits} of {total} ordered outcomes)")
                }
                _ => " (given)".into(),
            };
            r.line(format!(
                "P(1 | experiment {}, {}) = {}{counted} = {}",
                exp.name,
                hyp.label,
                fmt_rational(p),
                fmt_num(to_f64(p))
            ));
        }
    }
    for e in &spec.experiments {
        for (point, reported) in &e.reported {
            let ei = model.experiment_index(&e.name)?;
            let hi = model.hypothesis_index(point)?;
            let exact = model.probability(ei, hi);
            let agrees = exact == reported.value;
            r.line(format!(
                "note: reported P(1 | experiment {}, {point}) = {}; enumeration gives {} ({})",
                e.name,
                reported.text,
                fmt_rational(exact),
                if agrees { "agrees" } else { "disagrees" }
            ));
        }
    }
    Ok(())
}

fn build(spec: &ScenarioSpec, options: &PipelineOptions, tol: &Tolerances) -> Result<Outcome, PipelineError> {
    let sys = quantum(spec, options, tol)?;
    let mut r = Report::new();
    let mut csv = String::from("check,subject,residual,tolerance,pass\n");
    let mut row = |r: &mut Report, check: &str, subject: &str, residual: f64, limit: f64, strict: bool| {
        let ok = if strict { residual <= limit } else { residual < limit };
        let _ = writeln!(csv, "{check},{subject},{},{},{ok}", fmt_num(residual), fmt_num(limit));
        r.check(&format!("{check} {subject}"), ok, format!("residual {}", fmt_num(residual)));
    };
    let group = &sys.params.group;
    let names: Vec<&str> = sys.params.maps.iter().map(|m| m.name()).collect();
    r.line(format!("scenario: {}", spec.name));
    r.line(format!("group order: {}, points: {}", group.order(), spec.phi.len()));
    r.line(format!("base experiment: {}", names[sys.params.base]));
    r.line(format!("dimension of H: {}", sys.w.dimension()));
    r.line(format!("W: {}", origin_name(&sys)));

    let u = sys.rep.verify(group);
    row(&mut r, "regular_rep", "all_pairs", u.failures.len() as f64, 0.0, true);
    for (a, sub) in sys.subspaces.iter().enumerate() {
        let gram = sub.basis.adjoint() * &sub.basis;
        let res = linalg::distance(&gram, &linalg::identity(sub.dimension()));
        row(&mut r, "indicator_basis", names[a], res, 1e-12, false);
    }
    let subgroups = sys.params.subgroups();
    for a in 0..names.len() {
        for b in 0..names.len() {
            let transport = verify_subspace_transport(
                &sys.rep,
                &sys.subspaces[a],
                &subgroups[a],
                &sys.subspaces[b],
                sys.family.get(a, b),
                tol.subspace_invariance,
            );
            let subject = format!("{}->{}", names[a], names[b]);
            if a == b {
                row(
                    &mut r,
                    "subspace_invariance",
                    names[a],
                    transport.invariance_residual,
                    tol.subspace_invariance,
                    false,
                );
            }
            row(&mut r, "subspace_transport", &subject, transport.transport_residual, tol.subspace_transport, false);
        }
    }
    row(&mut r, "w_homomorphism", "all_pairs", sys.w_check.homomorphism_residual, sys.homomorphism_tolerance(), false);
    row(&mut r, "w_unitarity", "all_elements", sys.w_check.unitarity_residual, tol.unitarity, false);

    if let Some(t_base) = sys.states.operator(sys.params.base) {
        let base_spectrum = HermitianEigen::new(t_base, 1e-9).values;
        for (a, &name) in names.iter().enumerate() {
            let t = sys.states.operator(a).expect("operators exist when the base has eigenvalues");
            row(&mut r, "operator_self_adjoint", name, linalg::hermiticity_residual(t), tol.self_adjoint, false);
            let eig = sys.states.eigenvalues(sys.params.base).expect("base eigenvalues");
            let residual = sys
                .states
                .states(a)
                .iter()
                .zip(eig)
                .map(|(v, &l)| (t * v.vector() - v.vector().scale(l)).norm())
                .fold(0.0, f64::max);
            row(&mut r, "eigen_residual", name, residual, tol.eigen_residual, false);
            let spectrum = HermitianEigen::new(t, 1e-9).values;
            let gap = spectrum.iter().zip(&base_spectrum).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            row(&mut r, "spectrum_matches_base", name, gap, tol.homomorphism, false);
            if sys.states.eigenvalues(a).is_some() {
                let spectral = parameter_operator(&sys.states, a)?;
                row(&mut r, "spectral_form_matches", name, linalg::distance(&spectral, t), tol.eigen_residual, false);
            }
        }
    }
    Ok(r.finish(vec![("build.csv".into(), csv)]))
}

fn born_command(
    spec: &ScenarioSpec,
    options: &PipelineOptions,
    tol: &Tolerances,
    a_name: &str,
    b_name: &str,
) -> Result<Outcome, PipelineError> {
    let sys = quantum(spec, options, tol)?;
    let a = sys.params.experiment_index(a_name)?;
    let b = sys.params.experiment_index(b_name)?;
    let m = transition_matrix(&sys.states, a, b)?;
    let back = transition_matrix(&sys.states, b, a)?;
    let mut r = Report::new();
    let mut csv = String::from("value");
    for v in sys.states.values(b) {
        let _ = write!(csv, ",{v}");
    }
    csv.push('\n');
    r.line(format!("P({b_name} = column | {a_name} = row)"));
    for (k, entries) in m.entries.iter().enumerate() {
        let cells: Vec<String> = entries.iter().map(|&p| fmt_num(p)).collect();
        let _ = writeln!(csv, "{},{}", sys.states.values(a)[k], cells.join(","));
        r.line(format!("  {}: {}", sys.states.values(a)[k], cells.join(" ")));
    }
    r.check(
        "rows and columns sum to one",
        m.stochasticity_residual() < tol.stochastic,
        format!("residual {}", fmt_num(m.stochasticity_residual())),
    );
    let asym = m.max_difference(&back.transpose());
    r.check("symmetric under exchanging experiments", asym < tol.transpose, format!("difference {}", fmt_num(asym)));
    if sys.states.operator(b).is_some() {
        for k in 0..sys.states.dimension() {
            let e = born::expectation_given_value(&sys.states, a, k, b)?;
            r.line(format!("E({b_name} | {a_name} = {}) = {}", sys.states.values(a)[k], fmt_num(e)));
        }
    }
    Ok(r.finish(vec![(format!("born_{a_name}_{b_name}.csv"), csv)]))
}

fn states(spec: &ScenarioSpec, options: &PipelineOptions, tol: &Tolerances) -> Result<Outcome, PipelineError> {
    let sys = quantum(spec, options, tol)?;
    let table = &sys.states;
    let group = &sys.params.group;
    let mut r = Report::new();
    let v0 = state_from_question(table, sys.params.base, 0)?;
    let census = check_state_assumptions(&sys.w, &v0, table, tol.gcs);
    r.line(format!("scenario: {}", spec.name));
    r.line(format!(
        "orbit of {}={}: {} states from {} group elements",
        table.names()[sys.params.base],
        table.values(sys.params.base)[0],
        census.orbit_size,
        census.group_order
    ));

    let mut csv = String::from("experiment,value,round_trip,matches,in_base_orbit\n");
    let mut all_round_trips = true;
    for a in 0..table.num_experiments() {
        for k in 0..table.dimension() {
            let v = state_from_question(table, a, k)?;
            let matches = question_from_state(table, &v, tol.gcs)?;
            let ok = matches.contains(&(a, k));
            all_round_trips &= ok;
            let text: Vec<String> =
                matches.iter().map(|&(b, i)| format!("{}={}", table.names()[b], table.values(b)[i])).collect();
            let in_orbit = !census.coverage_missing.contains(&(a, k));
            let _ = writeln!(csv, "{},{},{ok},{},{in_orbit}", table.names()[a], table.values(a)[k], text.join(" "));
            if let Err(StateError::AmbiguousState { .. }) = identify_question(table, &v, tol.gcs) {
                r.line(format!(
                    "ambiguous: the state for {}={} answers {}",
                    table.names()[a],
                    table.values(a)[k],
                    text.join(" ")
                ));
            }
        }
    }
    r.check("question -> state -> question round trip", all_round_trips, "");

    let subgroups = sys.params.subgroups();
    let mut unique = 0;
    let mut failures = Vec::new();
    for g in 0..group.order() {
        match decompose(group, &subgroups[sys.params.base], &sys.family, sys.params.base, g) {
            Ok(_) => unique += 1,
            Err(e) => failures.push(e.to_string()),
        }
    }
    r.check(
        "every element factors uniquely as g = g^c g_cb",
        failures.is_empty(),
        format!(
            "{unique} of {} elements{}",
            group.order(),
            failures.first().map(|f| format!("; {f}")).unwrap_or_default()
        ),
    );
    Ok(r.finish(vec![("states.csv".into(), csv)]))
}

fn simulate_command(spec: &ScenarioSpec, options: &PipelineOptions) -> Result<Outcome, PipelineError> {
    let model = experiment_model(spec)?;
    let e = match &options.experiment {
        Some(name) => model.experiment_index(name)?,
        None => 0,
    };
    let lifetime = options.lifetime.unwrap_or(options.n);
    let traces: Vec<Trace> = match &options.hypothesis {
        Some(label) => {
            let h = model.hypothesis_index(label)?;
            if options.n == 0 || lifetime == 0 {
                return Err(PipelineError::Usage("trial count and lifetime must be positive".into()));
            }
            let mut out = Vec::new();
            let mut start = 0;
            let mut run = 0u64;
            while start < options.n {
                let len = lifetime.min(options.n - start);
                out.push(simulate(&model, e, h, len, options.seed, run)?);
                start += len;
                run += 1;
            }
            out
        }
        None => simulate_lifetimes(&model, e, options.n, lifetime, options.seed)?,
    };

    let mut r = Report::new();
    r.line(format!("generator: {RNG_ALGORITHM}, seed {}", options.seed));
    r.line(format!("experiment: {}, trials: {}, lifetime: {lifetime}", model.experiments()[e].name, options.n));
    let mut trace_csv = String::from("run_id,experiment,trial_index,bit\n");
    let mut files = Vec::new();
    let labels: Vec<String> = model.hypotheses().iter().map(|h| h.label.clone()).collect();
    let likelihoods = model.likelihoods(e);
    for t in &traces {
        for (i, &bit) in t.bits.iter().enumerate() {
            let _ = writeln!(trace_csv, "{},{},{i},{}", t.run_id, t.experiment, u8::from(bit));
        }
        let h = model.hypothesis_index(&t.hypothesis)?;
        let p = model.probability(e, h);
        let dev = (t.frequency() - to_f64(p)).abs();
        let band = four_sigma(to_f64(p), t.bits.len());
        r.check(
            &format!("run {} ({}): frequency within 4 sigma of {}", t.run_id, t.hypothesis, fmt_rational(p)),
            dev <= band,
            format!(
                "{} of {} = {}, deviation {}, band {}",
                t.ones(),
                t.bits.len(),
                fmt_num(t.frequency()),
                fmt_num(dev),
                fmt_num(band)
            ),
        );
        let post = bayes_update(&Posterior::uniform(labels.clone()), &likelihoods, &t.bits)?;
        let mut csv = String::from("hypothesis,probability\n");
        let mut summary = Vec::new();
        for (l, p) in post.labels.iter().zip(&post.probabilities) {
            let _ = writeln!(csv, "{l},{}", fmt_num(*p));
            summary.push(format!("{l} {}", fmt_num(*p)));
        }
        r.line(format!("  posterior: {}", summary.join(", ")));
        let name = if t.run_id == 0 { "posterior.csv".to_string() } else { format!("posterior_run{}.csv", t.run_id) };
        files.push((name, csv));
    }
    files.insert(0, ("trace.csv".into(), trace_csv));
    Ok(r.finish(files))
}

fn reduce(spec: &ScenarioSpec, options: &PipelineOptions, tol: &Tolerances) -> Result<Outcome, PipelineError> {
    let mut r = Report::new();
    let mut files = Vec::new();
    let mut did_something = false;
    if let Some(p) = options.zero_pattern {
        did_something = true;
        let census = zero_pattern_orbits(p)?;
        let orbit_text: Vec<String> = census
            .coordinate_orbits
            .iter()
            .map(|o| {
                let atoms: Vec<&str> = o
                    .iter()
                    .map(|a| match a {
                        SignAtom::Neg => "-",
                        SignAtom::Zero => "0",
                        SignAtom::Pos => "+",
                    })
                    .collect();
                format!("{{{}}}", atoms.join(" "))
            })
            .collect();
        r.line(format!("sign orbits of one coefficient: {}", orbit_text.join(" ")));
        r.check(
            &format!("every zero pattern on {p} coefficients is a union of orbits"),
            census.closed_patterns == census.patterns,
            format!("{} of {} closed", census.closed_patterns, census.patterns),
        );
    }
    if spec.design.is_some() {
        did_something = true;
        let design = design_spec(spec)?;
        let strata = randomization_strata(&design)?;
        r.line(format!(
            "units: {}, blocks: {}, pair orbits: {}",
            design.len(),
            design.blocks.len(),
            strata.class_count()
        ));
        if !strata.transitive() {
            r.line("warning: the block-respecting group is not transitive on units");
        }
        let mut csv = String::from("stratum_index,dimension\n");
        for (i, s) in strata.strata.iter().enumerate() {
            let _ = writeln!(csv, "{i},{}", s.dimension);
            r.line(format!("stratum {i}: dimension {}, eigenvalue {}", s.dimension, fmt_num(s.eigenvalue)));
        }
        r.check("covariance pattern invariant under the block-respecting group", strata.pattern_invariant, "");
        r.check(
            "strata projectors sum to the identity",
            strata.projector_sum_residual < tol.projector_sum,
            format!("residual {}", fmt_num(strata.projector_sum_residual)),
        );
        r.check(
            "strata are invariant subspaces",
            strata.stratum_invariance_residual < tol.projector_sum,
            format!("residual {}", fmt_num(strata.stratum_invariance_residual)),
        );
        files.push(("strata.csv".into(), csv));
    }
    if !spec.parameters.is_empty() {
        did_something = true;
        let group = scenario_group(spec)?;
        files.push(("closure.csv".into(), level_set_closure(spec, &group, &mut r)?));
    }
    if !did_something {
        return Err(PipelineError::Usage(
            "nothing to reduce: the scenario has no design or parameters and --zero-pattern was not given".into(),
        ));
    }
    Ok(r.finish(files))
}

fn level_set_closure(spec: &ScenarioSpec, group: &FiniteGroup, r: &mut Report) -> Result<String, PipelineError> {
    let names = labels(spec);
    let action = GroupAction::natural(group);
    let orbit_text: Vec<String> = orbits(&action)
        .blocks()
        .iter()
        .map(|b| format!("{{{}}}", b.iter().map(|&i| names[i].as_str()).collect::<Vec<_>>().join(" ")))
        .collect();
    r.line(format!("orbits of the group on points: {}", orbit_text.join(" ")));
    let mut csv = String::from("experiment,value,closed,witness_point,witness_generator\n");
    for p in &spec.parameters {
        for (k, v) in p.values.iter().enumerate() {
            let subset: Vec<usize> = (0..names.len()).filter(|&i| p.assignment[i] == k).collect();
            let verdict = orbit_closure_check(&subset, &action)?;
            let (wp, wg) = match verdict.witness {
                Some((pt, g)) => (names[pt].clone(), cycle_string(group.element(g), &names)),
                None => (String::new(), String::new()),
            };
            let _ = writeln!(csv, "{},{v},{},{wp},{wg}", p.name, verdict.closed);
            r.line(format!(
                "level set {}={v}: {}",
                p.name,
                if verdict.closed {
                    "union of orbits".to_string()
                } else {
                    format!("not closed ({wp} leaves under {wg})")
                }
            ));
        }
    }
    Ok(csv)
}

/// Checks a single element against a parameter, using point labels.
pub fn describe_violation(spec: &ScenarioSpec, parameter: usize, g: &Permutation) -> Option<String> {
    let p = &spec.parameters[parameter];
    let names = labels(spec);
    let map = crate::params::ParameterMap::new(p.name.clone(), p.values.clone(), p.assignment.clone()).ok()?;
    element_violation(&map, g).map(|(x, y)| {
        format!(
            "{}({}) = {}({}) but {}({}·g) = {} and {}({}·g) = {}",
            p.name,
            names[x],
            p.name,
            names[y],
            p.name,
            names[x],
            p.values[map.value_of(g.apply(x))],
            p.name,
            names[y],
            p.values[map.value_of(g.apply(y))]
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting() {
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(-0.25), "-0.25");
        assert_eq!(fmt_num(1.5e-13), "1.5e-13");
        assert_eq!(fmt_num(123456.0), "123456");
        assert_eq!(fmt_num(0.0), "0");
    }

    #[test]
    fn cycles_with_labels() {
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let p = Permutation::from_images(vec![1, 0, 2]).unwrap();
        assert_eq!(cycle_string(&p, &names), "(a b)");
        assert_eq!(cycle_string(&Permutation::identity(3), &names), "()");
    }
}
