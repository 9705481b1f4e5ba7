//! Line-oriented run configuration: `[section]` headers, `key = value` lines,
//! `#` comments.
//!
//! ```text
//! [problem]
//! rank = 3
//! n = 64
//! mode = cyclic          # or explicit
//!
//! [phi]                  # cyclic: 1..r in cyclic order; explicit: i,j / i,j.re / i,j.im
//! 1 = 1
//! 2 = 2
//! 3 = 1+sin(2*pi*x)^2
//!
//! [k]                    # default 1
//! [a]                    # default 0
//! [diag]                 # optional diagonal Higgs entries: 1.re, 1.im, ...
//! [solver]               # tol, max_iter, divergence_radius, max_cg_iter, initial
//! [probe]                # base, t = start:stop:count or a list, direction.NAME = ...
//! [verify]               # tol
//! [cone]                 # denominator
//! [output]               # dir
//! ```
//!
//! A field source is an expression in `x`, `y`, `pi` or `file:PATH[:PLANE]`
//! naming a plane (1-based, default 1) of an HEF1 file. Paths are relative
//! to the directory holding the config.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use hetoda::fieldexpr::{self, FieldExpr};
use hetoda::RootPair;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "config line {l}, column {c}: {}", self.message),
            (Some(l), None) => write!(f, "config line {l}: {}", self.message),
            _ => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Cyclic,
    Explicit,
}

/// Expression text is kept verbatim so that dumping reproduces it.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Expr(String),
    File { path: String, plane: Option<usize> },
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Expr(s) => f.write_str(s),
            Source::File { path, plane: None } => write!(f, "file:{path}"),
            Source::File { path, plane: Some(k) } => write!(f, "file:{path}:{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhiSpec {
    /// Cyclic position (1..=r) or explicit pair.
    pub slot: PhiSlot,
    pub re: Source,
    pub im: Option<Source>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiSlot {
    Cyclic(usize),
    Pair(RootPair),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Direction {
    Farkas,
    /// A whole HEF1 stack.
    File(String),
    /// One expression per plane.
    Planes(Vec<String>),
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Farkas => f.write_str("farkas"),
            Direction::File(p) => write!(f, "file:{p}"),
            Direction::Planes(v) => f.write_str(&v.join(", ")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TGrid {
    Range { start: f64, stop: f64, count: usize },
    List(Vec<f64>),
}

impl TGrid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            TGrid::List(v) => v.clone(),
            TGrid::Range { start, count: 1, .. } => vec![*start],
            TGrid::Range { start, stop, count } => {
                let h = (stop - start) / (*count - 1) as f64;
                (0..*count).map(|k| start + h * k as f64).collect()
            }
        }
    }
}

impl fmt::Display for TGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TGrid::Range { start, stop, count } => write!(f, "{start:?}:{stop:?}:{count}"),
            TGrid::List(v) => {
                let parts: Vec<String> = v.iter().map(|t| format!("{t:?}")).collect();
                f.write_str(&parts.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iter: usize,
    pub divergence_radius: f64,
    pub max_cg_iter: usize,
    pub initial: Option<String>,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = hetoda::SolveOptions::default();
        Self {
            tol: d.tol,
            max_iter: d.max_iter,
            divergence_radius: d.divergence_radius,
            max_cg_iter: d.max_cg_iter,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSection {
    pub base: Option<String>,
    pub t: TGrid,
    pub directions: Vec<(String, Direction)>,
}

impl Default for ProbeSection {
    fn default() -> Self {
        Self { base: None, t: TGrid::Range { start: 0.0, stop: 10.0, count: 21 }, directions: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Directory that relative paths resolve against; not part of the text.
    pub base_dir: PathBuf,
    pub rank: usize,
    pub n: usize,
    pub mode: Mode,
    pub phi: Vec<PhiSpec>,
    pub diag: BTreeMap<usize, (Option<Source>, Option<Source>)>,
    pub k: BTreeMap<usize, Source>,
    pub a: BTreeMap<usize, Source>,
    pub solver: SolverSection,
    pub probe: ProbeSection,
    pub verify_tol: f64,
    pub denominator: i64,
    pub output_dir: String,
}

pub const DEFAULT_VERIFY_TOL: f64 = 1e-8;

impl RunConfig {
    pub fn resolve(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            line: None,
            column: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        parse_config(&text, base)
    }

    /// Canonical text; parsing it back yields an equal config.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let mode = match self.mode {
            Mode::Cyclic => "cyclic",
            Mode::Explicit => "explicit",
        };
        let _ = writeln!(s, "[problem]\nrank = {}\nn = {}\nmode = {mode}\n", self.rank, self.n);
        s.push_str("[phi]\n");
        for e in &self.phi {
            let key = match e.slot {
                PhiSlot::Cyclic(k) => k.to_string(),
                PhiSlot::Pair(p) => format!("{},{}", p.i, p.j),
            };
            let _ = writeln!(s, "{key}.re = {}", e.re);
            if let Some(im) = &e.im {
                let _ = writeln!(s, "{key}.im = {im}");
            }
        }
        if !self.diag.is_empty() {
            s.push_str("\n[diag]\n");
            for (idx, (re, im)) in &self.diag {
                if let Some(re) = re {
                    let _ = writeln!(s, "{idx}.re = {re}");
                }
                if let Some(im) = im {
                    let _ = writeln!(s, "{idx}.im = {im}");
                }
            }
        }
        for (name, map) in [("k", &self.k), ("a", &self.a)] {
            let _ = writeln!(s, "\n[{name}]");
            for (idx, src) in map {
                let _ = writeln!(s, "{idx} = {src}");
            }
        }
        let sv = &self.solver;
        let _ = writeln!(
            s,
            "\n[solver]\ntol = {:?}\nmax_iter = {}\ndivergence_radius = {:?}\nmax_cg_iter = {}",
            sv.tol, sv.max_iter, sv.divergence_radius, sv.max_cg_iter
        );
        if let Some(init) = &sv.initial {
            let _ = writeln!(s, "initial = file:{init}");
        }
        let _ = writeln!(s, "\n[probe]\nt = {}", self.probe.t);
        if let Some(base) = &self.probe.base {
            let _ = writeln!(s, "base = file:{base}");
        }
        for (name, dir) in &self.probe.directions {
            let _ = writeln!(s, "direction.{name} = {dir}");
        }
        let _ = writeln!(s, "\n[verify]\ntol = {:?}", self.verify_tol);
        let _ = writeln!(s, "\n[cone]\ndenominator = {}", self.denominator);
        let _ = writeln!(s, "\n[output]\ndir = {}", self.output_dir);
        s
    }
}

struct Line<'a> {
    number: usize,
    key: &'a str,
    value: &'a str,
    value_col: usize,
}

impl Line<'_> {
    fn error(&self, message: impl Into<String>) -> ConfigError {
        ConfigError { line: Some(self.number), column: Some(self.value_col), message: message.into() }
    }

    fn parse_num<T: std::str::FromStr>(&self, what: &str) -> Result<T, ConfigError> {
        self.value.parse().map_err(|_| self.error(format!("{} must be {what}, got `{}`", self.key, self.value)))
    }

    fn positive_f64(&self) -> Result<f64, ConfigError> {
        let v: f64 = self.parse_num("a number")?;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.error(format!("{} must be positive and finite", self.key)))
        }
    }

    /// An expression or `file:` reference, with expressions parsed eagerly so
    /// syntax errors carry the line and column.
    fn source(&self) -> Result<Source, ConfigError> {
        if let Some(rest) = self.value.strip_prefix("file:") {
            let (path, plane) = match rest.rsplit_once(':') {
                Some((p, k)) if !k.is_empty() && k.bytes().all(|b| b.is_ascii_digit()) => {
                    let k: usize = k.parse().map_err(|_| self.error("plane index out of range"))?;
                    if k == 0 {
                        return Err(self.error("plane indices start at 1"));
                    }
                    (p, Some(k))
                }
                _ => (rest, None),
            };
            if path.is_empty() {
                return Err(self.error("empty file path"));
            }
            return Ok(Source::File { path: path.to_string(), plane });
        }
        self.expr(self.value, 0)?;
        Ok(Source::Expr(self.value.to_string()))
    }

    fn expr(&self, text: &str, offset: usize) -> Result<FieldExpr, ConfigError> {
        fieldexpr::parse(text).map_err(|e| ConfigError {
            line: Some(self.number),
            column: Some(self.value_col + offset + e.position),
            message: format!("{}: {e}", self.key),
        })
    }

    fn file_only(&self) -> Result<String, ConfigError> {
        match self.value.strip_prefix("file:") {
            Some(p) if !p.is_empty() => Ok(p.to_string()),
            _ => Err(self.error(format!("{} must be `file:PATH`", self.key))),
        }
    }
}

fn index_key(line: &Line, key: &str, r: usize) -> Result<usize, ConfigError> {
    let k: usize = key.parse().map_err(|_| line.error(format!("expected an index 1..{r}, got `{key}`")))?;
    if k == 0 || k > r {
        return Err(line.error(format!("index {k} outside 1..{r}")));
    }
    Ok(k)
}

fn split_part(key: &str) -> (&str, Option<&str>) {
    match key.rsplit_once('.') {
        Some((head, part @ ("re" | "im"))) => (head, Some(part)),
        _ => (key, None),
    }
}

fn parse_t(line: &Line) -> Result<TGrid, ConfigError> {
    let v = line.value;
    if v.contains(':') {
        let parts: Vec<&str> = v.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(line.error("t range must be start:stop:count"));
        }
        let num = |s: &str| s.parse::<f64>().ok().filter(|x| x.is_finite());
        let (Some(start), Some(stop)) = (num(parts[0]), num(parts[1])) else {
            return Err(line.error("t range bounds must be finite numbers"));
        };
        let count: usize = parts[2].parse().map_err(|_| line.error("t count must be a positive integer"))?;
        if count == 0 {
            return Err(line.error("t count must be a positive integer"));
        }
        return Ok(TGrid::Range { start, stop, count });
    }
    let list: Result<Vec<f64>, _> = v.split(',').map(|s| s.trim().parse::<f64>()).collect();
    match list {
        Ok(l) if !l.is_empty() && l.iter().all(|t| t.is_finite()) => Ok(TGrid::List(l)),
        _ => Err(line.error("t must be start:stop:count or a comma-separated list of numbers")),
    }
}

fn parse_direction(line: &Line, r: usize) -> Result<Direction, ConfigError> {
    let v = line.value;
    if v == "farkas" {
        return Ok(Direction::Farkas);
    }
    if v.starts_with("file:") {
        return Ok(Direction::File(line.file_only()?));
    }
    let mut planes = Vec::new();
    let mut offset = 0;
    for piece in v.split(',') {
        let lead = piece.len() - piece.trim_start().len();
        let text = piece.trim();
        line.expr(text, offset + lead)?;
        planes.push(text.to_string());
        offset += piece.len() + 1;
    }
    if planes.len() != r {
        return Err(line.error(format!("direction needs {r} comma-separated components, got {}", planes.len())));
    }
    Ok(Direction::Planes(planes))
}

const SECTIONS: [&str; 10] = ["problem", "phi", "diag", "k", "a", "solver", "probe", "verify", "cone", "output"];

pub fn parse_config(text: &str, base_dir: PathBuf) -> Result<RunConfig, ConfigError> {
    // First pass: split into sections so [problem] can be read before the rest.
    let mut sections: BTreeMap<&str, Vec<Line>> = BTreeMap::new();
    let mut seen_keys: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    let mut current: Option<&str> = None;
    for (idx, raw) in text.lines().enumerate() {
        let number = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(name) = trimmed.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            let Some(&known) = SECTIONS.iter().find(|&&s| s == name) else {
                return Err(ConfigError { line: Some(number), column: None, message: format!("unknown section [{name}]") });
            };
            sections.entry(known).or_default();
            current = Some(known);
            continue;
        }
        let Some(section) = current else {
            return Err(ConfigError { line: Some(number), column: None, message: "key outside of any section".into() });
        };
        let Some(eq) = content.find('=') else {
            return Err(ConfigError { line: Some(number), column: None, message: "expected `key = value`".into() });
        };
        let key = content[..eq].trim();
        let after = &content[eq + 1..];
        let value = after.trim();
        let value_col = eq + 2 + (after.len() - after.trim_start().len());
        if key.is_empty() {
            return Err(ConfigError { line: Some(number), column: Some(1), message: "empty key".into() });
        }
        if let Some(prev) = seen_keys.insert((section, key), number) {
            return Err(ConfigError {
                line: Some(number),
                column: None,
                message: format!("duplicate key `{key}` in [{section}] (first on line {prev})"),
            });
        }
        sections.entry(section).or_default().push(Line { number, key, value, value_col });
    }

    let empty = Vec::new();
    let get = |name: &str| sections.get(name).unwrap_or(&empty);

    let mut rank = None;
    let mut n = None;
    let mut mode = Mode::Cyclic;
    for line in get("problem") {
        match line.key {
            "rank" => {
                let r: usize = line.parse_num("an integer")?;
                if r < 2 {
                    return Err(line.error("rank must be at least 2"));
                }
                rank = Some(r);
            }
            "n" => {
                let v: usize = line.parse_num("an integer")?;
                if v < 8 || !v.is_power_of_two() {
                    return Err(line.error(format!("n must be a power of two at least 8, got {v}")));
                }
                n = Some(v);
            }
            "mode" => {
                mode = match line.value {
                    "cyclic" => Mode::Cyclic,
                    "explicit" => Mode::Explicit,
                    other => return Err(line.error(format!("mode must be cyclic or explicit, got `{other}`"))),
                }
            }
            other => return Err(line.error(format!("unknown key `{other}` in [problem]"))),
        }
    }
    let missing = |what: &str| ConfigError { line: None, column: None, message: format!("[problem] {what} is required") };
    let r = rank.ok_or_else(|| missing("rank"))?;
    let n = n.ok_or_else(|| missing("n"))?;

    let mut parts: Vec<(PhiSlot, Option<Source>, Option<Source>)> = Vec::new();
    for line in get("phi") {
        let (head, part) = split_part(line.key);
        let slot = match mode {
            Mode::Cyclic => PhiSlot::Cyclic(index_key(line, head, r)?),
            Mode::Explicit => {
                let Some((i, j)) = head.split_once(',') else {
                    return Err(line.error(format!("explicit entries are keyed `i,j`, got `{head}`")));
                };
                let i = index_key(line, i.trim(), r)?;
                let j = index_key(line, j.trim(), r)?;
                if i == j {
                    return Err(line.error("diagonal entries belong in [diag]"));
                }
                PhiSlot::Pair(RootPair::new(i, j))
            }
        };
        let pos = match parts.iter().position(|e| e.0 == slot) {
            Some(pos) => pos,
            None => {
                parts.push((slot, None, None));
                parts.len() - 1
            }
        };
        let target = if part == Some("im") { &mut parts[pos].2 } else { &mut parts[pos].1 };
        if target.is_some() {
            return Err(line.error("entry given twice"));
        }
        *target = Some(line.source()?);
    }
    // An entry with only `.im` has real part zero.
    let mut phi: Vec<PhiSpec> = parts
        .into_iter()
        .map(|(slot, re, im)| PhiSpec { slot, re: re.unwrap_or_else(|| Source::Expr("0".into())), im })
        .collect();
    if mode == Mode::Cyclic {
        phi.sort_by_key(|e| match e.slot {
            PhiSlot::Cyclic(k) => k,
            PhiSlot::Pair(_) => 0,
        });
        if phi.len() != r {
            return Err(ConfigError {
                line: None,
                column: None,
                message: format!("cyclic mode needs all {r} entries in [phi], got {}", phi.len()),
            });
        }
    }

    let mut diag: BTreeMap<usize, (Option<Source>, Option<Source>)> = BTreeMap::new();
    for line in get("diag") {
        let (head, part) = split_part(line.key);
        let idx = index_key(line, head, r)?;
        let slot = diag.entry(idx).or_default();
        let target = if part == Some("im") { &mut slot.1 } else { &mut slot.0 };
        if target.is_some() {
            return Err(line.error("diagonal entry given twice"));
        }
        *target = Some(line.source()?);
    }

    let mut k = BTreeMap::new();
    let mut a = BTreeMap::new();
    for (name, map) in [("k", &mut k), ("a", &mut a)] {
        for line in get(name) {
            map.insert(index_key(line, line.key, r)?, line.source()?);
        }
    }

    let mut solver = SolverSection::default();
    for line in get("solver") {
        match line.key {
            "tol" => solver.tol = line.positive_f64()?,
            "max_iter" => solver.max_iter = line.parse_num("an integer")?,
            "divergence_radius" => solver.divergence_radius = line.positive_f64()?,
            "max_cg_iter" => solver.max_cg_iter = line.parse_num("an integer")?,
            "initial" => solver.initial = Some(line.file_only()?),
            other => return Err(line.error(format!("unknown key `{other}` in [solver]"))),
        }
    }

    let mut probe = ProbeSection::default();
    for line in get("probe") {
        match line.key {
            "t" => probe.t = parse_t(line)?,
            "base" => probe.base = Some(line.file_only()?),
            key => {
                let Some(name) = key.strip_prefix("direction.") else {
                    return Err(line.error(format!("unknown key `{key}` in [probe]")));
                };
                if name.is_empty() || !name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-') {
                    return Err(line.error("direction names use letters, digits, `_` and `-`"));
                }
                probe.directions.push((name.to_string(), parse_direction(line, r)?));
            }
        }
    }

    let mut verify_tol = DEFAULT_VERIFY_TOL;
    for line in get("verify") {
        match line.key {
            "tol" => verify_tol = line.positive_f64()?,
            other => return Err(line.error(format!("unknown key `{other}` in [verify]"))),
        }
    }
    let mut denominator = hetoda::cone::DEFAULT_DENOMINATOR;
    for line in get("cone") {
        match line.key {
            "denominator" => {
                denominator = line.parse_num("an integer")?;
                if denominator <= 0 {
                    return Err(line.error("denominator must be positive"));
                }
            }
            other => return Err(line.error(format!("unknown key `{other}` in [cone]"))),
        }
    }
    let mut output_dir = "out".to_string();
    for line in get("output") {
        match line.key {
            "dir" if !line.value.is_empty() => output_dir = line.value.to_string(),
            "dir" => return Err(line.error("output dir is empty")),
            other => return Err(line.error(format!("unknown key `{other}` in [output]"))),
        }
    }

    Ok(RunConfig {
        base_dir,
        rank: r,
        n,
        mode,
        phi,
        diag,
        k,
        a,
        solver,
        probe,
        verify_tol,
        denominator,
        output_dir,
    })
}
