//! Command-line front end: config parsing, command dispatch, and the table /
//! record output formats.
//!
//! Config files are INI-style with sections `[base]`, `[base2]` (compare
//! only), and `[run]`. See the crate README for the full key reference.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_rational::Rational64;

use crate::boothby_wang::{
    first_chern_xi, well_definedness, BundleSpec, Convention, GeneratorKey,
};
use crate::homology_engine::{
    compare_ranks, compute, enumerate_family, poincare_series, GradedRanks,
};
use crate::moduli::{no_rigid_cylinders, DEFAULT_M_MAX};
use crate::orbifold_base::{custom, product_projective, weighted_projective, OrbifoldBase, Stratum};
use crate::symplectic_paths::{conley_zehnder, rs_index, SymplecticPath};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Compute,
    Compare,
    Enumerate,
    Certify,
    IndexPath,
    Validate,
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "compute" => Ok(Command::Compute),
            "compare" => Ok(Command::Compare),
            "enumerate" => Ok(Command::Enumerate),
            "certify" => Ok(Command::Certify),
            "index-path" => Ok(Command::IndexPath),
            "validate" => Ok(Command::Validate),
            other => Err(format!("unknown command '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Table,
    Records,
}

impl FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "table" => Ok(OutputFormat::Table),
            "records" => Ok(OutputFormat::Records),
            other => Err(format!("unknown format '{other}'")),
        }
    }
}

/// Fully parsed run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub base: Option<OrbifoldBase>,
    pub base2: Option<OrbifoldBase>,
    pub convention: Convention,
    pub max_degree: i64,
    pub m_max: u64,
    pub override_gate: bool,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    /// Chern-difference parameter for `enumerate`.
    pub family_c: i64,
    /// Upper bound on `k` for `enumerate`.
    pub family_bound: i64,
    /// Infinitesimal generator for `index-path` (square matrix, rows separated
    /// by `;`).
    pub generator: Option<DMatrix<f64>>,
    pub t_end: f64,
}

// ---------------------------------------------------------------------------
// Config parsing

struct RawSection {
    entries: Vec<(usize, String, String)>, // (line number, key, value)
}

fn split_sections(text: &str, errors: &mut Vec<String>) -> Vec<(String, RawSection)> {
    let mut sections: Vec<(String, RawSection)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                errors.push(format!("line {lineno}: malformed section header '{line}'"));
                continue;
            }
            let name = line[1..line.len() - 1].trim().to_string();
            sections.push((name, RawSection { entries: Vec::new() }));
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            errors.push(format!("line {lineno}: expected 'key = value', got '{line}'"));
            continue;
        };
        match sections.last_mut() {
            Some((_, s)) => {
                s.entries
                    .push((lineno, key.trim().to_string(), value.trim().to_string()))
            }
            None => errors.push(format!(
                "line {lineno}: key '{}' outside any [section]",
                key.trim()
            )),
        }
    }
    sections
}

fn parse_scalar<T: FromStr>(lineno: usize, key: &str, value: &str, errors: &mut Vec<String>) -> Option<T> {
    match value.parse::<T>() {
        Ok(v) => Some(v),
        Err(_) => {
            errors.push(format!("line {lineno}: invalid value '{value}' for '{key}'"));
            None
        }
    }
}

fn parse_rational(s: &str) -> Option<Rational64> {
    match s.split_once('/') {
        Some((p, q)) => Some(Rational64::new(p.trim().parse().ok()?, q.trim().parse().ok()?)),
        None => Some(Rational64::from_integer(s.trim().parse().ok()?)),
    }
}

fn parse_int_list<T: FromStr>(s: &str) -> Option<Vec<T>> {
    s.split(',')
        .map(|x| x.trim().parse::<T>().ok())
        .collect()
}

/// Parses one `stratum = name:dim:gamma:b0,b1,...:pairing` value.
fn parse_stratum(lineno: usize, value: &str, errors: &mut Vec<String>) -> Option<Stratum> {
    let parts: Vec<&str> = value.split(':').map(str::trim).collect();
    if parts.len() != 5 {
        errors.push(format!(
            "line {lineno}: stratum needs 5 colon-separated fields \
             (name:dim:gamma:betti:pairing), got {}",
            parts.len()
        ));
        return None;
    }
    let dim = parse_scalar::<u64>(lineno, "stratum dim", parts[1], errors)?;
    let gamma = parse_scalar::<u64>(lineno, "stratum gamma", parts[2], errors)?;
    let Some(betti) = parse_int_list::<u64>(parts[3]) else {
        errors.push(format!("line {lineno}: invalid betti list '{}'", parts[3]));
        return None;
    };
    let Some(pairing) = parse_rational(parts[4]) else {
        errors.push(format!("line {lineno}: invalid pairing '{}'", parts[4]));
        return None;
    };
    Some(Stratum {
        name: parts[0].to_string(),
        dim,
        gamma_order: gamma,
        betti,
        chern_pairing: pairing,
    })
}

fn build_base(section: &RawSection, label: &str, errors: &mut Vec<String>) -> Option<OrbifoldBase> {
    let mut builder: Option<(usize, String)> = None;
    let mut factors: Option<(usize, String)> = None;
    let mut weights: Option<(usize, String)> = None;
    let mut k: i64 = 1;
    let mut n: Option<u64> = None;
    let mut strata: Vec<Stratum> = Vec::new();
    let mut w: Option<(usize, String)> = None;
    let mut w_tilde: Option<(usize, String)> = None;
    let mut header_line = 0usize;

    for (lineno, key, value) in &section.entries {
        header_line = header_line.max(*lineno);
        match key.as_str() {
            "builder" => builder = Some((*lineno, value.clone())),
            "factors" => factors = Some((*lineno, value.clone())),
            "weights" => weights = Some((*lineno, value.clone())),
            "k" => {
                if let Some(v) = parse_scalar(*lineno, key, value, errors) {
                    k = v;
                }
            }
            "n" => n = parse_scalar(*lineno, key, value, errors),
            "stratum" => {
                if let Some(s) = parse_stratum(*lineno, value, errors) {
                    strata.push(s);
                }
            }
            "w" => w = Some((*lineno, value.clone())),
            "w_tilde" => w_tilde = Some((*lineno, value.clone())),
            other => errors.push(format!("line {lineno}: unknown [{label}] key '{other}'")),
        }
    }

    let Some((bline, builder)) = builder else {
        errors.push(format!(
            "line {header_line}: [{label}] requires a 'builder' key"
        ));
        return None;
    };
    let built = match builder.as_str() {
        "product_projective" => {
            let Some((fline, factors)) = factors else {
                errors.push(format!("line {bline}: product_projective needs 'factors'"));
                return None;
            };
            // factors = dim:weight, dim:weight, ...
            let mut pairs = Vec::new();
            for item in factors.split(',') {
                let Some((d, wt)) = item.split_once(':') else {
                    errors.push(format!(
                        "line {fline}: factor '{}' must be 'complex_dim:weight'",
                        item.trim()
                    ));
                    return None;
                };
                let d = parse_scalar::<u64>(fline, "factor dim", d.trim(), errors)?;
                let wt = parse_scalar::<i64>(fline, "factor weight", wt.trim(), errors)?;
                pairs.push((d, wt));
            }
            product_projective(&pairs)
        }
        "weighted_projective" => {
            let Some((wline, weights)) = weights else {
                errors.push(format!("line {bline}: weighted_projective needs 'weights'"));
                return None;
            };
            let Some(a) = parse_int_list::<u64>(&weights) else {
                errors.push(format!("line {wline}: invalid weights list '{weights}'"));
                return None;
            };
            weighted_projective(&a, k)
        }
        "custom" => {
            let Some(n) = n else {
                errors.push(format!("line {bline}: custom base needs 'n'"));
                return None;
            };
            let Some((wline, w)) = w else {
                errors.push(format!("line {bline}: custom base needs 'w'"));
                return None;
            };
            let Some(w) = parse_int_list::<i64>(&w) else {
                errors.push(format!("line {wline}: invalid w list"));
                return None;
            };
            let Some((wtline, wt)) = w_tilde else {
                errors.push(format!("line {bline}: custom base needs 'w_tilde'"));
                return None;
            };
            let parsed: Option<Vec<Rational64>> =
                wt.split(',').map(parse_rational).collect();
            let Some(wt) = parsed else {
                errors.push(format!("line {wtline}: invalid w_tilde list"));
                return None;
            };
            custom(n, strata, w, wt)
        }
        other => {
            errors.push(format!("line {bline}: unknown builder '{other}'"));
            return None;
        }
    };
    match built {
        Ok(base) => Some(base),
        Err(e) => {
            errors.push(format!("line {bline}: [{label}] construction failed: {e}"));
            None
        }
    }
}

fn parse_matrix(lineno: usize, value: &str, errors: &mut Vec<String>) -> Option<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = match value
        .split(';')
        .map(|row| parse_int_list::<f64>(row))
        .collect()
    {
        Some(r) => r,
        None => {
            errors.push(format!("line {lineno}: invalid matrix entry in '{value}'"));
            return None;
        }
    };
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || rows.iter().any(|r| r.len() != ncols) {
        errors.push(format!("line {lineno}: matrix rows must be nonempty and equal-length"));
        return None;
    }
    Some(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// Parses config text; collects every problem with its line number.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut errors = Vec::new();
    let sections = split_sections(text, &mut errors);

    let mut base = None;
    let mut base2 = None;
    let mut run: Option<&RawSection> = None;
    for (name, section) in &sections {
        match name.as_str() {
            "base" => base = build_base(section, "base", &mut errors),
            "base2" => base2 = build_base(section, "base2", &mut errors),
            "run" => run = Some(section),
            other => errors.push(format!("unknown section [{other}]")),
        }
    }

    let mut command = None;
    let mut convention = Convention::Unreduced;
    let mut max_degree = 40i64;
    let mut m_max = DEFAULT_M_MAX;
    let mut override_gate = false;
    let mut format = OutputFormat::Table;
    let mut out = None;
    let mut family_c = 1i64;
    let mut family_bound = 10i64;
    let mut generator = None;
    let mut t_end = 1.0f64;

    if let Some(section) = run {
        for (lineno, key, value) in &section.entries {
            match key.as_str() {
                "command" => command = parse_scalar(*lineno, key, value, &mut errors),
                "convention" => {
                    if let Some(c) = parse_scalar(*lineno, key, value, &mut errors) {
                        convention = c;
                    }
                }
                "max_degree" => {
                    if let Some(v) = parse_scalar(*lineno, key, value, &mut errors) {
                        max_degree = v;
                    }
                }
                "m_max" => {
                    if let Some(v) = parse_scalar(*lineno, key, value, &mut errors) {
                        m_max = v;
                    }
                }
                "override_gate" => {
                    if let Some(v) = parse_scalar(*lineno, key, value, &mut errors) {
                        override_gate = v;
                    }
                }
                "format" => {
                    if let Some(v) = parse_scalar(*lineno, key, value, &mut errors) {
                        format = v;
                    }
                }
                "out" => out = Some(PathBuf::from(value)),
                "c" => {
                    if let Some(v) = parse_scalar(*lineno, key, value, &mut errors) {
                        family_c = v;
                    }
                }
                "bound" => {
                    if let Some(v) = parse_scalar(*lineno, key, value, &mut errors) {
                        family_bound = v;
                    }
                }
                "generator" => generator = parse_matrix(*lineno, value, &mut errors),
                "t_end" => {
                    if let Some(v) = parse_scalar(*lineno, key, value, &mut errors) {
                        t_end = v;
                    }
                }
                other => errors.push(format!("line {lineno}: unknown [run] key '{other}'")),
            }
        }
    } else {
        errors.push("missing [run] section".into());
    }
    let Some(command) = command else {
        if errors.is_empty() {
            errors.push("missing 'command' in [run]".into());
        }
        return Err(Error::Config(errors));
    };

    match command {
        Command::Compute | Command::Certify | Command::Validate if base.is_none() => {
            errors.push("this command requires a [base] section".into());
        }
        Command::Compare if base.is_none() || base2.is_none() => {
            errors.push("compare requires [base] and [base2] sections".into());
        }
        Command::IndexPath if generator.is_none() => {
            errors.push("index-path requires 'generator' in [run]".into());
        }
        _ => {}
    }

    if !errors.is_empty() {
        return Err(Error::Config(errors));
    }
    Ok(RunConfig {
        command,
        base,
        base2,
        convention,
        max_degree,
        m_max,
        override_gate,
        format,
        out,
        family_c,
        family_bound,
        generator,
        t_end,
    })
}

// ---------------------------------------------------------------------------
// Record and table rendering

/// One line per degree: `degree,rank,name:m:d;name:m:d;...`.
pub fn to_records(g: &GradedRanks, base: &OrbifoldBase) -> String {
    let mut out = String::new();
    for (&degree, &rank) in &g.ranks {
        let triples: Vec<String> = g.provenance[&degree]
            .iter()
            .map(|k| format!("{}:{}:{}", base.strata[k.stratum].name, k.m, k.d))
            .collect();
        let _ = writeln!(out, "{degree},{rank},{}", triples.join(";"));
    }
    out
}

/// Re-parses record lines into graded ranks. `max_degree` is recovered as the
/// largest listed degree and `smallest_omitted` is not representable, so only
/// `ranks` and `provenance` round-trip.
pub fn from_records(
    text: &str,
    base: &OrbifoldBase,
    convention: Convention,
) -> Result<GradedRanks> {
    let stratum_index = |name: &str| {
        base.strata
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| Error::Input(format!("unknown stratum '{name}' in records")))
    };
    let mut ranks = std::collections::BTreeMap::new();
    let mut provenance = std::collections::BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parse_err =
            || Error::Input(format!("records line {}: malformed '{line}'", i + 1));
        let mut fields = line.splitn(3, ',');
        let degree: i64 = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(parse_err)?;
        let rank: u64 = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(parse_err)?;
        let triples = fields.next().ok_or_else(parse_err)?;
        let mut keys = Vec::new();
        for t in triples.split(';').filter(|t| !t.is_empty()) {
            let parts: Vec<&str> = t.split(':').collect();
            if parts.len() != 3 {
                return Err(parse_err());
            }
            keys.push(GeneratorKey {
                stratum: stratum_index(parts[0])?,
                m: parts[1].parse().map_err(|_| parse_err())?,
                d: parts[2].parse().map_err(|_| parse_err())?,
            });
        }
        if keys.len() as u64 != rank {
            return Err(Error::Input(format!(
                "records line {}: rank {rank} does not match {} provenance triples",
                i + 1,
                keys.len()
            )));
        }
        ranks.insert(degree, rank);
        provenance.insert(degree, keys);
    }
    let max_degree = ranks.keys().next_back().copied().unwrap_or(0);
    Ok(GradedRanks {
        ranks,
        provenance,
        max_degree,
        convention,
        smallest_omitted: None,
    })
}

fn render_table(g: &GradedRanks, base: &OrbifoldBase, out: &mut String) {
    let _ = writeln!(out, "{:>8}  {:>4}  generators", "degree", "rank");
    for (&degree, &rank) in &g.ranks {
        let gens: Vec<String> = g.provenance[&degree]
            .iter()
            .map(|k| format!("{}(m={},d={})", base.strata[k.stratum].name, k.m, k.d))
            .collect();
        let _ = writeln!(out, "{degree:>8}  {rank:>4}  {}", gens.join(" "));
    }
    let _ = writeln!(out, "Poincare series: {}", poincare_series(g));
    if let Some(d) = g.smallest_omitted {
        let _ = writeln!(out, "(cutoff {}; next generator at degree {d})", g.max_degree);
    }
}

// ---------------------------------------------------------------------------
// Command dispatch

fn spec_of(base: &OrbifoldBase, convention: Convention) -> Result<BundleSpec> {
    BundleSpec::new(base.clone(), convention)
}

/// Runs the configured command, writing human or record output to `sink`.
pub fn run_to(config: &RunConfig, sink: &mut dyn Write) -> Result<()> {
    let mut out = String::new();
    match config.command {
        Command::Compute => {
            let base = config.base.as_ref().unwrap();
            let spec = spec_of(base, config.convention)?;
            let g = compute(&spec, config.max_degree, config.override_gate)?;
            match config.format {
                OutputFormat::Records => out.push_str(&to_records(&g, base)),
                OutputFormat::Table => render_table(&g, base, &mut out),
            }
        }
        Command::Compare => {
            let (ba, bb) = (config.base.as_ref().unwrap(), config.base2.as_ref().unwrap());
            let sa = spec_of(ba, config.convention)?;
            let sb = spec_of(bb, config.convention)?;
            let ga = compute(&sa, config.max_degree, config.override_gate)?;
            let gb = compute(&sb, config.max_degree, config.override_gate)?;
            let verdict = compare_ranks(&ga, &gb);
            let _ = writeln!(out, "{:>8}  {:>6}  {:>6}", "degree", "rank A", "rank B");
            let mut degrees: Vec<i64> =
                ga.ranks.keys().chain(gb.ranks.keys()).copied().collect();
            degrees.sort_unstable();
            degrees.dedup();
            for d in degrees {
                let _ = writeln!(out, "{d:>8}  {:>6}  {:>6}", ga.rank(d), gb.rank(d));
            }
            match verdict.first_difference {
                Some((d, ra, rb)) => {
                    let _ = writeln!(out, "FIRST DIFFERENCE: degree {d} ({ra} vs {rb})");
                }
                None => {
                    let _ = writeln!(out, "NO DIFFERENCE up to degree {}", config.max_degree);
                }
            }
        }
        Command::Enumerate => {
            let t = enumerate_family(config.family_c, config.family_bound, config.max_degree)?;
            let _ = writeln!(out, "family k - l = {}, k <= {}", t.c, config.family_bound);
            for m in &t.members {
                let _ = writeln!(out, "({},{})  c1(xi) = {}", m.k, m.l, m.chern);
            }
            for (i, j, v) in &t.verdicts {
                let (a, b) = (&t.members[*i], &t.members[*j]);
                match v.first_difference {
                    Some((d, ra, rb)) => {
                        let _ = writeln!(
                            out,
                            "({},{}) vs ({},{}): FIRST DIFFERENCE: degree {d} ({ra} vs {rb})",
                            a.k, a.l, b.k, b.l
                        );
                    }
                    None => {
                        let _ = writeln!(
                            out,
                            "({},{}) vs ({},{}): NO DIFFERENCE up to degree {}",
                            a.k, a.l, b.k, b.l, config.max_degree
                        );
                    }
                }
            }
        }
        Command::Certify => {
            let base = config.base.as_ref().unwrap();
            let spec = spec_of(base, config.convention)?;
            let cert = no_rigid_cylinders(&spec, config.m_max)?;
            if cert.holds {
                let _ = writeln!(out, "NO RIGID CYLINDERS: certified (m_max = {})", cert.m_max);
            } else {
                let _ = writeln!(out, "RIGID CYLINDER WITNESSES (m_max = {}):", cert.m_max);
                for w in &cert.witnesses {
                    let (pi, pm) = w.positive[0];
                    let (ni, nm) = w.negative[0];
                    let _ = writeln!(
                        out,
                        "  {}(m={}) -> {}(m={})",
                        base.strata[pi].name, pm, base.strata[ni].name, nm
                    );
                }
            }
        }
        Command::Validate => {
            let base = config.base.as_ref().unwrap();
            base.validate()?;
            let spec = spec_of(base, config.convention)?;
            let wd = well_definedness(&spec)?;
            let _ = writeln!(out, "base: valid ({} strata, n = {})", base.strata.len(), base.n);
            let _ = writeln!(
                out,
                "well-definedness: sum w_tilde = {} ({})",
                base.sum_w_tilde(),
                if wd.sufficient { "sufficient" } else { "NOT sufficient" }
            );
            if !wd.bad_degrees.is_empty() {
                for (k, d) in &wd.bad_degrees {
                    let _ = writeln!(
                        out,
                        "  generator {}(m={},d={}) has degree {d}",
                        base.strata[k.stratum].name, k.m, k.d
                    );
                }
            }
            let c = first_chern_xi(&spec)?;
            let _ = writeln!(out, "c1(xi) in quotient lattice: {c}");
        }
        Command::IndexPath => {
            let gen = config.generator.clone().unwrap();
            let path = SymplecticPath::from_generator(gen, config.t_end)?;
            let rs = rs_index(&path)?;
            let _ = writeln!(out, "RS index: {rs}");
            match conley_zehnder(&path) {
                Ok(cz) => {
                    let _ = writeln!(out, "CZ index: {cz}");
                }
                Err(Error::DegenerateEndpoint) => {
                    let _ = writeln!(out, "CZ index: undefined (degenerate endpoint)");
                }
                Err(e) => return Err(e),
            }
        }
    }

    match &config.out {
        Some(path) => {
            std::fs::write(path, out)?;
        }
        None => {
            sink.write_all(out.as_bytes())?;
        }
    }
    Ok(())
}

/// Runs the command and maps errors to exit codes: 0 success, 2 gate failure,
/// 1 anything else. Error text goes to `err_sink`.
pub fn run(config: &RunConfig, sink: &mut dyn Write, err_sink: &mut dyn Write) -> i32 {
    match run_to(config, sink) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err_sink, "error: {e}");
            match e {
                Error::GateFailed { .. } => 2,
                _ => 1,
            }
        }
    }
}
