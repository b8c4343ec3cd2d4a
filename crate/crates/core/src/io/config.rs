//! Run configuration: a line-oriented `key = value` format with bracketed
//! sections.
//!
//! ```text
//! # Alfvén wave
//! [case]
//! name = alfven
//!
//! [grid]
//! nx = 32
//! ny = 32
//!
//! [time]
//! ht = 0.1
//! t_end = 20
//! ```
//!
//! Comments start with `#` or `;`. Values may be quoted. Unset grid keys
//! take the benchmark values of the selected case. See the README for the
//! full list of keys.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::cases::{CaseId, CaseSpec};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::integrator::{LinearSolverKind, NewtonConfig, Preconditioner};

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RunConfig {
    pub case: CaseSpec,
    #[serde(skip)]
    pub grid: Grid,
    pub ht: f64,
    pub t_end: f64,
    pub n_steps: usize,
    pub snapshot_every: usize,
    pub diag_every: usize,
    pub snapshot_initial: bool,
    pub newton: NewtonConfig,
    pub output_dir: PathBuf,
}

const KEYS: &[(&str, &[&str])] = &[
    ("case", &["name", "v0", "b0", "a0", "radius", "pressure"]),
    ("grid", &["nx", "ny", "lx", "ly", "x0", "y0"]),
    ("time", &["ht", "t_end"]),
    ("output", &["dir", "snapshot_every", "diag_every", "snapshot_initial"]),
    (
        "newton",
        &[
            "tol",
            "max_iter",
            "linear_solver",
            "gmres_restart",
            "gmres_tol",
            "gmres_max_iter",
            "preconditioner",
            "extrapolate",
        ],
    ),
];

impl RunConfig {
    /// Renders the resolved configuration in the input format, with every
    /// key spelled out.
    pub fn to_config_text(&self) -> String {
        let g = &self.grid;
        let c = &self.case;
        let n = &self.newton;
        let mut s = String::new();
        s.push_str(&format!("[case]\nname = {}\n", c.id));
        s.push_str(&format!("v0 = {:?}\nb0 = {:?}\na0 = {:?}\nradius = {:?}\npressure = {:?}\n", c.v0(g), c.b0, c.a0, c.radius, c.pressure()));
        s.push_str(&format!(
            "\n[grid]\nnx = {}\nny = {}\nlx = {:?}\nly = {:?}\nx0 = {:?}\ny0 = {:?}\n",
            g.nx, g.ny, g.lx, g.ly, g.x0, g.y0
        ));
        s.push_str(&format!("\n[time]\nht = {:?}\nt_end = {:?}\n", self.ht, self.t_end));
        s.push_str(&format!(
            "\n[output]\ndir = \"{}\"\nsnapshot_every = {}\ndiag_every = {}\nsnapshot_initial = {}\n",
            self.output_dir.display(),
            self.snapshot_every,
            self.diag_every,
            self.snapshot_initial
        ));
        let solver = match n.linear_solver {
            LinearSolverKind::Direct => "direct",
            LinearSolverKind::Gmres => "gmres",
        };
        let pc = match n.preconditioner {
            Preconditioner::None => "none",
            Preconditioner::BlockJacobi => "block-jacobi",
            Preconditioner::Ilu => "ilu",
        };
        s.push_str(&format!(
            "\n[newton]\ntol = {:?}\nmax_iter = {}\nlinear_solver = {solver}\ngmres_restart = {}\ngmres_tol = {:?}\ngmres_max_iter = {}\npreconditioner = {pc}\nextrapolate = {}\n",
            n.tol, n.max_iter, n.gmres_restart, n.gmres_tol, n.gmres_max_iter, n.extrapolate
        ));
        s
    }
}

/// Raw entries keyed by `section.key`, with their line numbers.
struct Entries(BTreeMap<String, (String, usize)>);

fn parse_lines(text: &str) -> Result<Entries> {
    let mut map: BTreeMap<String, (String, usize)> = BTreeMap::new();
    let mut section: Option<String> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') || s.starts_with(';') {
            continue;
        }
        if let Some(rest) = s.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| Error::ConfigParse {
                line,
                message: "unterminated section header".into(),
            })?;
            let name = name.trim();
            if name.is_empty() {
                return Err(Error::ConfigParse {
                    line,
                    message: "empty section name".into(),
                });
            }
            section = Some(name.to_string());
            continue;
        }
        let (k, v) = s.split_once('=').ok_or_else(|| Error::ConfigParse {
            line,
            message: format!("expected `key = value`, found `{s}`"),
        })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::ConfigParse {
                line,
                message: "missing key".into(),
            });
        }
        let sec = section.as_deref().ok_or_else(|| Error::ConfigParse {
            line,
            message: format!("key `{k}` appears before any section"),
        })?;
        let v = strip_comment(v.trim());
        let v = unquote(v).map_err(|message| Error::ConfigParse { line, message })?;
        let full = format!("{sec}.{k}");
        if let Some((_, first)) = map.get(&full) {
            return Err(Error::DuplicateKey {
                key: full,
                first: *first,
                second: line,
            });
        }
        map.insert(full, (v, line));
    }
    Ok(Entries(map))
}

fn strip_comment(v: &str) -> &str {
    if v.starts_with('"') {
        return v;
    }
    match v.find(" #").or_else(|| v.find(" ;")) {
        Some(p) => v[..p].trim_end(),
        None => v,
    }
}

fn unquote(v: &str) -> std::result::Result<String, String> {
    match v.strip_prefix('"') {
        Some(rest) => {
            let end = rest.find('"').ok_or("unterminated string")?;
            let tail = rest[end + 1..].trim();
            if !(tail.is_empty() || tail.starts_with('#') || tail.starts_with(';')) {
                return Err(format!("unexpected text after string: `{tail}`"));
            }
            Ok(rest[..end].to_string())
        }
        None => Ok(v.to_string()),
    }
}

fn invalid(field: &str, message: impl Into<String>) -> Error {
    Error::ConfigValue {
        field: field.into(),
        message: message.into(),
    }
}

impl Entries {
    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(|(v, _)| v.as_str())
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| invalid(key, format!("expected a finite number, found `{v}`")))
            })
            .transpose()
    }

    fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.raw(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| invalid(key, format!("expected a non-negative integer, found `{v}`")))
            })
            .transpose()
    }

    fn bool(&self, key: &str) -> Result<Option<bool>> {
        self.raw(key)
            .map(|v| match v {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(invalid(key, format!("expected true or false, found `{v}`"))),
            })
            .transpose()
    }

    fn unknown(&self) -> Vec<(String, usize)> {
        self.0
            .iter()
            .filter(|(k, _)| {
                let (sec, key) = k.split_once('.').unwrap();
                !KEYS.iter().any(|(s, ks)| *s == sec && ks.contains(&key))
            })
            .map(|(k, (_, line))| (k.clone(), *line))
            .collect()
    }
}

/// Parses and validates a configuration. Unknown keys are returned as
/// warnings, or rejected when `strict` is set.
pub fn parse_config(text: &str, strict: bool) -> Result<(RunConfig, Vec<String>)> {
    let e = parse_lines(text)?;
    let mut warnings = Vec::new();
    for (key, line) in e.unknown() {
        if strict {
            return Err(Error::ConfigParse {
                line,
                message: format!("unknown key `{key}`"),
            });
        }
        warnings.push(format!("line {line}: ignoring unknown key `{key}`"));
    }

    let name = e
        .raw("case.name")
        .ok_or_else(|| invalid("case.name", "case.name is required"))?;
    let id: CaseId = name.parse()?;
    let mut case = CaseSpec::new(id);
    case.v0 = e.f64("case.v0")?;
    case.pressure = e.f64("case.pressure")?;
    if let Some(v) = e.f64("case.b0")? {
        case.b0 = v;
    }
    if let Some(v) = e.f64("case.a0")? {
        case.a0 = v;
    }
    if let Some(v) = e.f64("case.radius")? {
        case.radius = v;
    }

    let (nx, ny, lx, ly, x0, y0) = id.default_grid();
    let nx = e.usize("grid.nx")?.unwrap_or(nx);
    let ny = e.usize("grid.ny")?.unwrap_or(ny);
    let lx = e.f64("grid.lx")?.unwrap_or(lx);
    let ly = e.f64("grid.ly")?.unwrap_or(ly);
    let x0 = e.f64("grid.x0")?.unwrap_or(x0);
    let y0 = e.f64("grid.y0")?.unwrap_or(y0);
    if nx < 2 || ny < 2 {
        return Err(invalid("grid", "nx and ny must be at least 2"));
    }
    if !(lx > 0.0 && ly > 0.0) {
        return Err(invalid("grid", "lx and ly must be positive"));
    }
    let grid = Grid::new(nx, ny, lx, ly, x0, y0)?;
    case.validate(&grid)?;

    let ht = e.f64("time.ht")?.unwrap_or(id.default_ht());
    if !(ht > 0.0) {
        return Err(invalid("time.ht", "ht must be positive"));
    }
    let t_end = e
        .f64("time.t_end")?
        .ok_or_else(|| invalid("time.t_end", "t_end is required"))?;
    if !(t_end > 0.0) {
        return Err(invalid("time.t_end", "t_end must be positive"));
    }
    let steps = (t_end / ht).round();
    if steps < 1.0 || (steps * ht - t_end).abs() > 1e-9 * t_end {
        return Err(invalid(
            "time.t_end",
            format!("t_end = {t_end} is not a whole number of steps of ht = {ht}"),
        ));
    }

    let snapshot_every = e.usize("output.snapshot_every")?.unwrap_or(100);
    let diag_every = e.usize("output.diag_every")?.unwrap_or(1);
    if snapshot_every < 1 {
        return Err(invalid("output.snapshot_every", "snapshot_every must be at least 1"));
    }
    if diag_every < 1 {
        return Err(invalid("output.diag_every", "diag_every must be at least 1"));
    }

    let mut newton = NewtonConfig::for_grid(&grid);
    if let Some(v) = e.f64("newton.tol")? {
        newton.tol = v;
    }
    if let Some(v) = e.usize("newton.max_iter")? {
        newton.max_iter = v;
    }
    if let Some(v) = e.raw("newton.linear_solver") {
        newton.linear_solver = match v {
            "direct" => LinearSolverKind::Direct,
            "gmres" => LinearSolverKind::Gmres,
            _ => return Err(invalid("newton.linear_solver", format!("expected direct or gmres, found `{v}`"))),
        };
    }
    if let Some(v) = e.usize("newton.gmres_restart")? {
        newton.gmres_restart = v;
    }
    if let Some(v) = e.f64("newton.gmres_tol")? {
        newton.gmres_tol = v;
    }
    if let Some(v) = e.usize("newton.gmres_max_iter")? {
        newton.gmres_max_iter = v;
    }
    if let Some(v) = e.raw("newton.preconditioner") {
        newton.preconditioner = match v {
            "none" => Preconditioner::None,
            "block-jacobi" => Preconditioner::BlockJacobi,
            "ilu" => Preconditioner::Ilu,
            _ => {
                return Err(invalid(
                    "newton.preconditioner",
                    format!("expected none, block-jacobi or ilu, found `{v}`"),
                ))
            }
        };
    }
    if let Some(v) = e.bool("newton.extrapolate")? {
        newton.extrapolate = v;
    }
    newton.validate().map_err(|err| match err {
        Error::ConfigValue { field, message } => Error::ConfigValue {
            field: format!("newton.{field}"),
            message,
        },
        other => other,
    })?;

    Ok((
        RunConfig {
            case,
            grid,
            ht,
            t_end,
            n_steps: steps as usize,
            snapshot_every,
            diag_every,
            snapshot_initial: e.bool("output.snapshot_initial")?.unwrap_or(false),
            newton,
            output_dir: PathBuf::from(e.raw("output.dir").unwrap_or("output")),
        },
        warnings,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[case]\nname = alfven\n\n[grid]\nnx = 32\nny = 32\n\n[time]\nht = 0.1\nt_end = 20\n";

    #[test]
    fn minimal_alfven_config() {
        let (c, w) = parse_config(MINIMAL, true).unwrap();
        assert!(w.is_empty());
        assert_eq!(c.case.id, CaseId::Alfven);
        assert_eq!((c.grid.nx, c.grid.ny, c.grid.lx, c.grid.ly), (32, 32, 2.0, 2.0));
        assert_eq!(c.n_steps, 200);
        assert_eq!(c.snapshot_every, 100);
        assert_eq!(c.diag_every, 1);
        assert_eq!(c.newton.tol, 1e-10);
        assert_eq!(c.newton.linear_solver, LinearSolverKind::Direct);
        assert_eq!(c.output_dir, PathBuf::from("output"));
    }

    #[test]
    fn zero_time_step_is_rejected() {
        let text = MINIMAL.replace("ht = 0.1", "ht = 0");
        let err = parse_config(&text, false).unwrap_err();
        assert!(err.to_string().contains("ht must be positive"), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn duplicate_key_names_both_lines() {
        let text = "[time]\nht = 0.1\nt_end = 1\nht = 0.2\n";
        match parse_config(text, false) {
            Err(Error::DuplicateKey { key, first, second }) => {
                assert_eq!((key.as_str(), first, second), ("time.ht", 2, 4));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_warn_or_fail() {
        let text = format!("{MINIMAL}[grid2]\nfoo = 1\n");
        let (_, w) = parse_config(&text, false).unwrap();
        assert_eq!(w.len(), 1);
        assert!(w[0].contains("grid2.foo"));
        assert!(matches!(parse_config(&text, true), Err(Error::ConfigParse { line: 12, .. })));
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        assert!(matches!(parse_config("[case\n", false), Err(Error::ConfigParse { line: 1, .. })));
        assert!(matches!(parse_config("[case]\nname alfven\n", false), Err(Error::ConfigParse { line: 2, .. })));
        assert!(matches!(parse_config("name = x\n", false), Err(Error::ConfigParse { line: 1, .. })));
    }

    #[test]
    fn overrides_and_quoting() {
        let text = "[case]\nname = \"sheet_tanh\"  # comment\nv0 = 0.2\n[time]\nt_end = 5\n[output]\ndir = \"out dir\"\n[newton]\nlinear_solver = gmres\npreconditioner = block-jacobi\n";
        let (c, _) = parse_config(text, true).unwrap();
        assert_eq!(c.case.id, CaseId::SheetTanh);
        assert_eq!(c.case.v0, Some(0.2));
        assert_eq!(c.ht, 0.1);
        assert_eq!(c.n_steps, 50);
        assert_eq!(c.output_dir, PathBuf::from("out dir"));
        assert_eq!(c.newton.preconditioner, Preconditioner::BlockJacobi);
    }

    #[test]
    fn resolved_text_parses_back() {
        let (c, _) = parse_config(MINIMAL, true).unwrap();
        let (back, w) = parse_config(&c.to_config_text(), true).unwrap();
        assert!(w.is_empty());
        assert_eq!(back.case.v0, Some(1.0));
        assert_eq!(back.grid, c.grid);
        assert_eq!((back.ht, back.t_end, back.n_steps), (c.ht, c.t_end, c.n_steps));
        assert_eq!(back.newton, c.newton);
        assert_eq!(back.to_config_text(), c.to_config_text());
    }

    #[test]
    fn bad_values_name_the_field() {
        for (text, field) in [
            ("[case]\nname = alfven\n[time]\nt_end = 1\nht = abc\n", "time.ht"),
            ("[case]\nname = nope\n[time]\nt_end = 1\n", "case.name"),
            ("[case]\nname = alfven\n[time]\nt_end = 0.15\n", "time.t_end"),
            ("[case]\nname = alfven\n[time]\nt_end = 1\n[newton]\ntol = -1\n", "newton.tol"),
            ("[case]\nname = alfven\n[time]\nt_end = 1\n[output]\ndiag_every = 0\n", "output.diag_every"),
        ] {
            match parse_config(text, false) {
                Err(Error::ConfigValue { field: f, .. }) => assert_eq!(f, field),
                other => panic!("{text}: {other:?}"),
            }
        }
    }
}
