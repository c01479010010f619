//! The line-oriented scenario file format.
//!
//! ```text
//! # comment
//! [options]
//! name = triangle
//! base = w1
//!
//! [phi]
//! ABC
//! CAB key=value
//!
//! [generators]
//! rotate = (ABC BCA CAB)(ACB CBA BAC)
//! flip = [ABC BAC CBA ACB CAB BCA]
//!
//! [parameter w1]
//! values = A B C
//! eigenvalues = 1 2 3
//! maximal = true
//! ABC -> A
//!
//! [experiment b]
//! statistic = any
//! p1 die = 11/36
//! reported cards = 16/36
//!
//! [explicit_rep]
//! dimension = 2
//! projective = true
//! generator = rotate
//! row = 1+0i 0+0i
//! row = 0+0i 0-1i
//!
//! [design]
//! blocks = u1 u2 | u3 u4
//! treatments = T1 T2 T1 T2
//! ```
//!
//! Image notation lists the image of each point in `[phi]` order.  Design
//! units are the points of `[phi]`.

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};

use num_rational::Rational64;
use thiserror::Error;

use crate::inference::Statistic;
use crate::linalg::{self, CMatrix};

/// Unitarity tolerance for explicit generator matrices.
pub const EXPLICIT_UNITARITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    Parse,
    Validation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

fn join(diags: &[Diagnostic]) -> String {
    diags.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    /// At least one syntax error; every diagnostic found is included.
    #[error("parse error:\n{}", join(.0))]
    Parse(Vec<Diagnostic>),
    #[error("validation error:\n{}", join(.0))]
    Validation(Vec<Diagnostic>),
}

impl ScenarioError {
    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            ScenarioError::Parse(d) | ScenarioError::Validation(d) => d,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhiPoint {
    pub label: String,
    pub attributes: Vec<(String, String)>,
}

impl PhiPoint {
    pub fn attribute(&self, key: &str) -> Option<&str> {
        self.attributes.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub name: String,
    /// `images[i]` is the index of `phi[i]·g`.
    pub images: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSpec {
    pub name: String,
    pub values: Vec<String>,
    pub eigenvalues: Option<Vec<f64>>,
    pub maximal: bool,
    /// Value index of each point of phi.
    pub assignment: Vec<usize>,
}

/// A rational as written in the file, with its reduced value.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalText {
    pub text: String,
    pub value: Rational64,
}

impl RationalText {
    pub fn parse(text: &str) -> Option<Self> {
        let value = match text.split_once('/') {
            Some((n, d)) => {
                let n: i64 = n.trim().parse().ok()?;
                let d: i64 = d.trim().parse().ok()?;
                if d == 0 {
                    return None;
                }
                Rational64::new(n, d)
            }
            None => Rational64::from_integer(text.trim().parse().ok()?),
        };
        Some(RationalText { text: text.trim().to_string(), value })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub statistic: Statistic,
    /// Outcome-1 probabilities fixed per point of phi.
    pub p1: Vec<(String, RationalText)>,
    /// Published figures to compare against; never used in computation.
    pub reported: Vec<(String, RationalText)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitRepSpec {
    pub dimension: usize,
    pub projective: bool,
    pub generators: Vec<(String, CMatrix)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignSection {
    pub blocks: Option<Vec<Vec<usize>>>,
    pub treatments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub base: Option<String>,
    pub phi: Vec<PhiPoint>,
    pub generators: Vec<GeneratorSpec>,
    pub parameters: Vec<ParameterSpec>,
    pub experiments: Vec<ExperimentSpec>,
    pub explicit_rep: Option<ExplicitRepSpec>,
    pub design: Option<DesignSection>,
    /// Remaining `[options]` entries in file order.
    pub options: Vec<(String, String)>,
}

impl ScenarioSpec {
    pub fn phi_index(&self, label: &str) -> Option<usize> {
        self.phi.iter().position(|p| p.label == label)
    }

    pub fn parameter_index(&self, name: &str) -> Option<usize> {
        self.parameters.iter().position(|p| p.name == name)
    }

    /// The declared base experiment, or the first parameter.
    pub fn base_index(&self) -> Option<usize> {
        match &self.base {
            Some(b) => self.parameter_index(b),
            None => (!self.parameters.is_empty()).then_some(0),
        }
    }

    pub fn option(&self, key: &str) -> Option<&str> {
        self.options.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

struct Section {
    kind: String,
    arg: Option<String>,
    line: usize,
    body: Vec<(usize, String)>,
}

#[derive(Default)]
struct Diags(Vec<Diagnostic>);

impl Diags {
    fn parse(&mut self, line: usize, message: impl Into<String>) {
        self.0.push(Diagnostic { line: Some(line), kind: DiagnosticKind::Parse, message: message.into() });
    }

    fn invalid(&mut self, line: Option<usize>, message: impl Into<String>) {
        self.0.push(Diagnostic { line, kind: DiagnosticKind::Validation, message: message.into() });
    }
}

fn split_sections(text: &str, diags: &mut Diags) -> Vec<Section> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(inner) = content.strip_prefix('[') {
            let Some(inner) = inner.strip_suffix(']') else {
                diags.parse(line, format!("unterminated section header '{content}'"));
                continue;
            };
            let mut words = inner.split_whitespace();
            let kind = words.next().unwrap_or("").to_string();
            let arg: Vec<&str> = words.collect();
            sections.push(Section { kind, arg: (!arg.is_empty()).then(|| arg.join(" ")), line, body: Vec::new() });
        } else if let Some(s) = sections.last_mut() {
            s.body.push((line, content.to_string()));
        } else {
            diags.parse(line, "content outside of any section");
        }
    }
    sections
}

fn key_value(content: &str) -> Option<(&str, &str)> {
    content.split_once('=').map(|(k, v)| (k.trim(), v.trim()))
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

/// Parses `re+imi`, `re-imi` or a bare real.
pub fn parse_complex(s: &str) -> Option<num_complex::Complex64> {
    let Some(body) = s.strip_suffix('i') else {
        return s.parse().ok().map(|re| linalg::c(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split =
        (1..bytes.len()).rev().find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'))?;
    let re: f64 = body[..split].parse().ok()?;
    let im: f64 = body[split..].parse().ok()?;
    Some(linalg::c(re, im))
}

pub fn format_complex(z: num_complex::Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", z.re, sign, z.im.abs())
}

pub fn parse_scenario(text: &str) -> Result<ScenarioSpec, ScenarioError> {
    let mut d = Diags::default();
    let sections = split_sections(text, &mut d);

    let mut seen: HashSet<(String, Option<String>)> = HashSet::new();
    for s in &sections {
        let known = matches!(
            s.kind.as_str(),
            "phi" | "generators" | "parameter" | "experiment" | "explicit_rep" | "design" | "options"
        );
        if !known {
            d.parse(s.line, format!("unknown section [{}]", s.kind));
        } else if matches!(s.kind.as_str(), "parameter" | "experiment") != s.arg.is_some() {
            d.parse(s.line, format!("section [{}] has a malformed name", s.kind));
        } else if !seen.insert((s.kind.clone(), s.arg.clone())) {
            d.invalid(Some(s.line), format!("duplicate section [{}]", s.kind));
        }
    }

    let phi_sections: Vec<&Section> = sections.iter().filter(|s| s.kind == "phi").collect();
    let Some(phi_section) = phi_sections.first() else {
        d.0.insert(0, Diagnostic { line: None, kind: DiagnosticKind::Parse, message: "missing [phi] section".into() });
        return Err(ScenarioError::Parse(d.0));
    };
    let phi = parse_phi(phi_section, &mut d);
    let index: HashMap<&str, usize> = phi.iter().enumerate().map(|(i, p)| (p.label.as_str(), i)).collect();

    let mut spec = ScenarioSpec {
        name: String::new(),
        base: None,
        phi: Vec::new(),
        generators: Vec::new(),
        parameters: Vec::new(),
        experiments: Vec::new(),
        explicit_rep: None,
        design: None,
        options: Vec::new(),
    };
    let mut base_line = None;
    let mut explicit_line = 0;
    for s in &sections {
        match s.kind.as_str() {
            "options" => {
                for (line, content) in &s.body {
                    match key_value(content) {
                        Some(("name", v)) => spec.name = v.to_string(),
                        Some(("base", v)) => {
                            spec.base = Some(v.to_string());
                            base_line = Some(*line);
                        }
                        Some((k, v)) if !k.is_empty() => spec.options.push((k.to_string(), v.to_string())),
                        _ => d.parse(*line, format!("expected 'key = value', found '{content}'")),
                    }
                }
            }
            "generators" => {
                for (line, content) in &s.body {
                    if let Some(g) = parse_generator(*line, content, &index, &mut d) {
                        spec.generators.push(g);
                    }
                }
            }
            "parameter" => {
                if let Some(p) = parse_parameter(s, &index, &mut d) {
                    spec.parameters.push(p);
                }
            }
            "experiment" => {
                if let Some(e) = parse_experiment(s, &index, &mut d) {
                    spec.experiments.push(e);
                }
            }
            "explicit_rep" => {
                explicit_line = s.line;
                spec.explicit_rep = parse_explicit(s, &mut d);
            }
            "design" => spec.design = parse_design(s, &index, &mut d),
            _ => {}
        }
    }
    spec.phi = phi;

    let mut names = HashSet::new();
    for g in &spec.generators {
        if !names.insert(g.name.as_str()) {
            d.invalid(None, format!("generator '{}' is declared twice", g.name));
        }
    }
    if let Some(base) = &spec.base {
        if spec.parameter_index(base).is_none() {
            d.invalid(base_line, format!("base experiment '{base}' is not a declared parameter"));
        }
    }
    if let Some(rep) = &spec.explicit_rep {
        let declared: Vec<&str> = spec.generators.iter().map(|g| g.name.as_str()).collect();
        let mut given: Vec<&str> = rep.generators.iter().map(|(n, _)| n.as_str()).collect();
        for n in &given {
            if !declared.contains(n) {
                d.invalid(Some(explicit_line), format!("explicit matrix for unknown generator '{n}'"));
            }
        }
        given.sort_unstable();
        for n in &declared {
            if given.binary_search(n).is_err() {
                d.invalid(Some(explicit_line), format!("generator '{n}' has no explicit matrix"));
            }
        }
    }

    if d.0.is_empty() {
        Ok(spec)
    } else if d.0.iter().any(|x| x.kind == DiagnosticKind::Parse) {
        Err(ScenarioError::Parse(d.0))
    } else {
        Err(ScenarioError::Validation(d.0))
    }
}

fn parse_phi(s: &Section, d: &mut Diags) -> Vec<PhiPoint> {
    let mut out: Vec<PhiPoint> = Vec::new();
    for (line, content) in &s.body {
        let mut words = content.split_whitespace();
        let label = words.next().unwrap_or_default().to_string();
        let mut attributes = Vec::new();
        for w in words {
            match w.split_once('=') {
                Some((k, v)) if !k.is_empty() => attributes.push((k.to_string(), v.to_string())),
                _ => d.parse(*line, format!("expected 'key=value' attribute, found '{w}'")),
            }
        }
        if out.iter().any(|p| p.label == label) {
            d.invalid(Some(*line), format!("point '{label}' is declared twice"));
            continue;
        }
        out.push(PhiPoint { label, attributes });
    }
    if out.is_empty() {
        d.invalid(Some(s.line), "[phi] declares no points");
    }
    out
}

fn resolve<'a>(
    line: usize,
    labels: impl Iterator<Item = &'a str>,
    index: &HashMap<&str, usize>,
    d: &mut Diags,
) -> Option<Vec<usize>> {
    let mut ok = true;
    let out = labels
        .map(|l| {
            index.get(l).copied().unwrap_or_else(|| {
                d.invalid(Some(line), format!("unknown point '{l}'"));
                ok = false;
                0
            })
        })
        .collect();
    ok.then_some(out)
}

fn parse_generator(line: usize, content: &str, index: &HashMap<&str, usize>, d: &mut Diags) -> Option<GeneratorSpec> {
    let Some((name, rhs)) = key_value(content) else {
        d.parse(line, format!("expected 'name = (cycles)' or 'name = [images]', found '{content}'"));
        return None;
    };
    let n = index.len();
    let labels: Vec<&str> = {
        let mut v = vec![""; n];
        for (l, &i) in index {
            v[i] = l;
        }
        v
    };
    let images = if let Some(inner) = rhs.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        let images = resolve(line, inner.split_whitespace(), index, d)?;
        if images.len() != n {
            d.invalid(Some(line), format!("generator '{name}' lists {} images for {n} points", images.len()));
            return None;
        }
        let mut hit = vec![false; n];
        for &i in &images {
            if std::mem::replace(&mut hit[i], true) {
                d.invalid(
                    Some(line),
                    format!("generator '{name}' is not a bijection: image '{}' is repeated", labels[i]),
                );
                return None;
            }
        }
        images
    } else if rhs.starts_with('(') {
        let mut images: Vec<usize> = (0..n).collect();
        let mut moved = vec![false; n];
        let mut rest = rhs;
        while !rest.is_empty() {
            let Some(body) = rest.strip_prefix('(') else {
                d.parse(line, format!("malformed cycle notation '{rhs}'"));
                return None;
            };
            let Some(end) = body.find(')') else {
                d.parse(line, format!("unclosed cycle in '{rhs}'"));
                return None;
            };
            let cycle = resolve(line, body[..end].split_whitespace(), index, d)?;
            for (k, &x) in cycle.iter().enumerate() {
                if std::mem::replace(&mut moved[x], true) {
                    d.invalid(
                        Some(line),
                        format!("generator '{name}' is not a bijection: point '{}' is repeated", labels[x]),
                    );
                    return None;
                }
                images[x] = cycle[(k + 1) % cycle.len()];
            }
            rest = body[end + 1..].trim_start();
        }
        images
    } else {
        d.parse(line, format!("generator '{name}' must use (cycle) or [image] notation"));
        return None;
    };
    Some(GeneratorSpec { name: name.to_string(), images })
}

fn parse_reals(line: usize, what: &str, text: &str, d: &mut Diags) -> Option<Vec<f64>> {
    let parsed: Result<Vec<f64>, _> = text.split_whitespace().map(str::parse).collect();
    parsed.map_err(|_| d.parse(line, format!("{what} must be numbers: '{text}'"))).ok()
}

fn parse_parameter(s: &Section, index: &HashMap<&str, usize>, d: &mut Diags) -> Option<ParameterSpec> {
    let name = s.arg.clone()?;
    let mut values: Option<Vec<String>> = None;
    let mut eigenvalues = None;
    let mut eigen_line = s.line;
    let mut maximal = true;
    let mut pairs: Vec<(usize, &str, &str)> = Vec::new();
    for (line, content) in &s.body {
        if let Some((lhs, rhs)) = content.split_once("->") {
            pairs.push((*line, lhs.trim(), rhs.trim()));
            continue;
        }
        match key_value(content) {
            Some(("values", v)) => values = Some(v.split_whitespace().map(String::from).collect()),
            Some(("eigenvalues", v)) => {
                eigenvalues = parse_reals(*line, "eigenvalues", v, d);
                eigen_line = *line;
            }
            Some(("maximal", v)) => match parse_bool(v) {
                Some(b) => maximal = b,
                None => d.parse(*line, format!("maximal must be true or false, found '{v}'")),
            },
            _ => d.parse(*line, format!("unrecognized line in [parameter {name}]: '{content}'")),
        }
    }
    let Some(values) = values else {
        d.invalid(Some(s.line), format!("parameter '{name}' declares no values"));
        return None;
    };
    let mut assignment = vec![usize::MAX; index.len()];
    for (line, point, value) in pairs {
        let Some(&p) = index.get(point) else {
            d.invalid(Some(line), format!("unknown point '{point}'"));
            continue;
        };
        let Some(v) = values.iter().position(|x| x == value) else {
            d.invalid(Some(line), format!("'{value}' is not a declared value of '{name}'"));
            continue;
        };
        if assignment[p] != usize::MAX {
            d.invalid(Some(line), format!("point '{point}' is assigned twice in '{name}'"));
        }
        assignment[p] = v;
    }
    let missing: Vec<&str> = index.iter().filter(|(_, &i)| assignment[i] == usize::MAX).map(|(l, _)| *l).collect();
    if !missing.is_empty() {
        let mut missing = missing;
        missing.sort_unstable();
        d.invalid(Some(s.line), format!("parameter '{name}' leaves points unassigned: {}", missing.join(" ")));
        return None;
    }
    for (k, v) in values.iter().enumerate() {
        if !assignment.contains(&k) {
            d.invalid(Some(s.line), format!("value '{v}' of '{name}' is never attained"));
        }
    }
    if let Some(e) = &eigenvalues {
        if e.len() != values.len() {
            d.invalid(Some(eigen_line), format!("{} eigenvalues for {} values", e.len(), values.len()));
        } else if maximal {
            for (i, x) in e.iter().enumerate() {
                if e[..i].contains(x) {
                    d.invalid(Some(eigen_line), format!("eigenvalue {x} is repeated but '{name}' is declared maximal"));
                }
            }
        }
    }
    Some(ParameterSpec { name, values, eigenvalues, maximal, assignment })
}

fn parse_experiment(s: &Section, index: &HashMap<&str, usize>, d: &mut Diags) -> Option<ExperimentSpec> {
    let name = s.arg.clone()?;
    let mut statistic = None;
    let mut p1 = Vec::new();
    let mut reported = Vec::new();
    for (line, content) in &s.body {
        let Some((lhs, rhs)) = key_value(content) else {
            d.parse(*line, format!("expected 'key = value', found '{content}'"));
            continue;
        };
        let words: Vec<&str> = lhs.split_whitespace().collect();
        match words.as_slice() {
            ["statistic"] => match rhs {
                "first" => statistic = Some(Statistic::First),
                "any" => statistic = Some(Statistic::Any),
                _ => d.parse(*line, format!("statistic must be 'first' or 'any', found '{rhs}'")),
            },
            [kind @ ("p1" | "reported"), point] => {
                let Some(r) = RationalText::parse(rhs) else {
                    d.parse(*line, format!("'{rhs}' is not a rational number"));
                    continue;
                };
                if !index.contains_key(point) {
                    d.invalid(Some(*line), format!("unknown point '{point}'"));
                    continue;
                }
                let target = if *kind == "p1" { &mut p1 } else { &mut reported };
                target.push((point.to_string(), r));
            }
            _ => d.parse(*line, format!("unrecognized line in [experiment {name}]: '{content}'")),
        }
    }
    let Some(statistic) = statistic else {
        d.invalid(Some(s.line), format!("experiment '{name}' declares no statistic"));
        return None;
    };
    Some(ExperimentSpec { name, statistic, p1, reported })
}

fn parse_explicit(s: &Section, d: &mut Diags) -> Option<ExplicitRepSpec> {
    let mut dimension = None;
    let mut projective = false;
    let mut current: Option<(usize, String, Vec<Vec<num_complex::Complex64>>)> = None;
    let mut raw: Vec<(usize, String, Vec<Vec<num_complex::Complex64>>)> = Vec::new();
    for (line, content) in &s.body {
        match key_value(content) {
            Some(("dimension", v)) => match v.parse::<usize>() {
                Ok(n) if n > 0 => dimension = Some(n),
                _ => d.parse(*line, format!("dimension must be a positive integer, found '{v}'")),
            },
            Some(("projective", v)) => match parse_bool(v) {
                Some(b) => projective = b,
                None => d.parse(*line, format!("projective must be true or false, found '{v}'")),
            },
            Some(("generator", v)) => {
                raw.extend(current.take());
                current = Some((*line, v.to_string(), Vec::new()));
            }
            Some(("row", v)) => {
                let entries: Option<Vec<_>> = v.split_whitespace().map(parse_complex).collect();
                match (entries, current.as_mut()) {
                    (Some(e), Some(cur)) => cur.2.push(e),
                    (None, _) => d.parse(*line, format!("malformed complex entries in '{v}'")),
                    (_, None) => d.parse(*line, "row before any 'generator ='"),
                }
            }
            _ => d.parse(*line, format!("unrecognized line in [explicit_rep]: '{content}'")),
        }
    }
    raw.extend(current);
    let Some(n) = dimension else {
        d.invalid(Some(s.line), "[explicit_rep] declares no dimension");
        return None;
    };
    let mut generators = Vec::new();
    for (line, name, rows) in raw {
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            d.invalid(Some(line), format!("matrix for '{name}' is not {n}x{n}"));
            continue;
        }
        let m = CMatrix::from_fn(n, n, |i, j| rows[i][j]);
        let residual = linalg::unitarity_residual(&m);
        if residual > EXPLICIT_UNITARITY_TOLERANCE {
            d.invalid(Some(line), format!("matrix for '{name}' is not unitary (residual {residual:.3e})"));
            continue;
        }
        generators.push((name, m));
    }
    Some(ExplicitRepSpec { dimension: n, projective, generators })
}

fn parse_design(s: &Section, index: &HashMap<&str, usize>, d: &mut Diags) -> Option<DesignSection> {
    let mut blocks = None;
    let mut treatments = None;
    for (line, content) in &s.body {
        match key_value(content) {
            Some(("blocks", v)) => {
                let parsed: Option<Vec<Vec<usize>>> =
                    v.split('|').map(|b| resolve(*line, b.split_whitespace(), index, d)).collect();
                blocks = parsed;
            }
            Some(("treatments", v)) => {
                let t: Vec<String> = v.split_whitespace().map(String::from).collect();
                if t.len() != index.len() {
                    d.invalid(Some(*line), format!("{} treatments for {} units", t.len(), index.len()));
                }
                treatments = Some(t);
            }
            _ => d.parse(*line, format!("unrecognized line in [design]: '{content}'")),
        }
    }
    if let Some(bs) = &blocks {
        let mut count = vec![0usize; index.len()];
        for &u in bs.iter().flatten() {
            count[u] += 1;
        }
        if count.iter().any(|&c| c != 1) {
            d.invalid(Some(s.line), "blocks must contain every unit exactly once");
        }
    }
    let Some(treatments) = treatments else {
        d.invalid(Some(s.line), "[design] declares no treatments");
        return None;
    };
    Some(DesignSection { blocks, treatments })
}

fn join_f64(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")
}

/// Canonical text form: generators in image notation, sections in a fixed
/// order.  `parse_scenario(&serialize_scenario(s)) == Ok(s)`.
pub fn serialize_scenario(spec: &ScenarioSpec) -> String {
    let mut out = String::new();
    let label = |i: usize| spec.phi[i].label.as_str();
    out.push_str("[options]\n");
    let _ = writeln!(out, "name = {}", spec.name);
    if let Some(b) = &spec.base {
        let _ = writeln!(out, "base = {b}");
    }
    for (k, v) in &spec.options {
        let _ = writeln!(out, "{k} = {v}");
    }

    out.push_str("\n[phi]\n");
    for p in &spec.phi {
        out.push_str(&p.label);
        for (k, v) in &p.attributes {
            let _ = write!(out, " {k}={v}");
        }
        out.push('\n');
    }

    if !spec.generators.is_empty() {
        out.push_str("\n[generators]\n");
        for g in &spec.generators {
            let images: Vec<&str> = g.images.iter().map(|&i| label(i)).collect();
            let _ = writeln!(out, "{} = [{}]", g.name, images.join(" "));
        }
    }

    for p in &spec.parameters {
        let _ = writeln!(out, "\n[parameter {}]", p.name);
        let _ = writeln!(out, "values = {}", p.values.join(" "));
        if let Some(e) = &p.eigenvalues {
            let _ = writeln!(out, "eigenvalues = {}", join_f64(e));
        }
        if !p.maximal {
            out.push_str("maximal = false\n");
        }
        for (i, &v) in p.assignment.iter().enumerate() {
            let _ = writeln!(out, "{} -> {}", label(i), p.values[v]);
        }
    }

    for e in &spec.experiments {
        let _ = writeln!(out, "\n[experiment {}]", e.name);
        let stat = match e.statistic {
            Statistic::First => "first",
            Statistic::Any => "any",
        };
        let _ = writeln!(out, "statistic = {stat}");
        for (point, r) in &e.p1 {
            let _ = writeln!(out, "p1 {point} = {}", r.text);
        }
        for (point, r) in &e.reported {
            let _ = writeln!(out, "reported {point} = {}", r.text);
        }
    }

    if let Some(rep) = &spec.explicit_rep {
        out.push_str("\n[explicit_rep]\n");
        let _ = writeln!(out, "dimension = {}", rep.dimension);
        let _ = writeln!(out, "projective = {}", rep.projective);
        for (name, m) in &rep.generators {
            let _ = writeln!(out, "generator = {name}");
            for i in 0..m.nrows() {
                let row: Vec<String> = (0..m.ncols()).map(|j| format_complex(m[(i, j)])).collect();
                let _ = writeln!(out, "row = {}", row.join(" "));
            }
        }
    }

    if let Some(design) = &spec.design {
        out.push_str("\n[design]\n");
        if let Some(blocks) = &design.blocks {
            let text: Vec<String> =
                blocks.iter().map(|b| b.iter().map(|&u| label(u)).collect::<Vec<_>>().join(" ")).collect();
            let _ = writeln!(out, "blocks = {}", text.join(" | "));
        }
        let _ = writeln!(out, "treatments = {}", design.treatments.join(" "));
    }
    out
}
