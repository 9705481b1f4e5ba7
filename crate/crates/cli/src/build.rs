//! Turns a parsed config into problem data.

use std::collections::HashMap;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use hetoda::grid::io::load_hef1;
use hetoda::{fieldexpr, HiggsEntry, HiggsProblem, PeriodicGrid, Potential, ScalarField, WeightSystem};

use crate::config::{Direction, Mode, PhiSlot, RunConfig, Source};

/// Evaluates sources on the config grid, loading each HEF1 file once.
pub struct FieldLoader<'a> {
    cfg: &'a RunConfig,
    grid: PeriodicGrid,
    files: HashMap<PathBuf, Vec<ScalarField>>,
}

impl<'a> FieldLoader<'a> {
    pub fn new(cfg: &'a RunConfig) -> Result<Self> {
        let grid = PeriodicGrid::new(cfg.n)?;
        Ok(Self { cfg, grid, files: HashMap::new() })
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    fn stack(&mut self, path: &str) -> Result<&Vec<ScalarField>> {
        let full = self.cfg.resolve(path);
        if !self.files.contains_key(&full) {
            let planes = load_hef1(&full).with_context(|| format!("reading {}", full.display()))?;
            if let Some(p) = planes.first() {
                if p.grid().n() != self.grid.n() {
                    bail!("{} has grid size {}, config says n = {}", full.display(), p.grid().n(), self.grid.n());
                }
            }
            self.files.insert(full.clone(), planes);
        }
        Ok(&self.files[&full])
    }

    pub fn field(&mut self, src: &Source, what: &str) -> Result<ScalarField> {
        match src {
            Source::Expr(text) => {
                let e = fieldexpr::parse(text).map_err(|e| anyhow!("{what}: {e}"))?;
                e.evaluate(&self.grid).map_err(|e| anyhow!("{what}: {e}"))
            }
            Source::File { path, plane } => {
                let k = plane.unwrap_or(1);
                let stack = self.stack(path)?;
                stack
                    .get(k - 1)
                    .cloned()
                    .ok_or_else(|| anyhow!("{what}: {path} has {} planes, plane {k} requested", stack.len()))
            }
        }
    }

    /// A whole stack of `rank` planes as a trace-free potential.
    pub fn potential(&mut self, path: &str) -> Result<Potential> {
        let r = self.cfg.rank;
        let planes = self.stack(path)?.clone();
        if planes.len() != r {
            bail!("{path} has {} planes, rank is {r}", planes.len());
        }
        Ok(Potential::new(planes).with_context(|| format!("{path} is not a trace-free stack"))?)
    }

    fn direction(&mut self, dir: &Direction, name: &str) -> Result<Option<Potential>> {
        match dir {
            Direction::Farkas => Ok(None),
            Direction::File(path) => self.potential(path).map(Some),
            Direction::Planes(exprs) => {
                let planes = exprs
                    .iter()
                    .enumerate()
                    .map(|(k, e)| self.field(&Source::Expr(e.clone()), &format!("direction {name} component {}", k + 1)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Some(Potential::new(planes).with_context(|| format!("direction {name} is not trace-free"))?))
            }
        }
    }
}

pub fn build_problem(cfg: &RunConfig, loader: &mut FieldLoader) -> Result<HiggsProblem> {
    let r = cfg.rank;
    let grid = loader.grid().clone();
    let ws = match cfg.mode {
        Mode::Cyclic => WeightSystem::cyclic(r)?,
        Mode::Explicit => WeightSystem::new(
            r,
            cfg.phi.iter().map(|e| match e.slot {
                PhiSlot::Pair(p) => p,
                PhiSlot::Cyclic(_) => unreachable!("explicit mode has pair keys"),
            }),
        )?,
    };
    let mut entries = Vec::with_capacity(cfg.phi.len());
    for e in &cfg.phi {
        let pair = match e.slot {
            PhiSlot::Pair(p) => p,
            PhiSlot::Cyclic(k) => ws.active()[k - 1],
        };
        let re = loader.field(&e.re, &format!("phi {pair} re"))?;
        let im = match &e.im {
            Some(src) => loader.field(src, &format!("phi {pair} im"))?,
            None => ScalarField::zeros(&grid),
        };
        entries.push(HiggsEntry { pair, re, im });
    }
    let indexed = |loader: &mut FieldLoader, map: &std::collections::BTreeMap<usize, Source>, default: f64, what: &str| {
        (1..=r)
            .map(|j| match map.get(&j) {
                Some(src) => loader.field(src, &format!("{what} {j}")),
                None => Ok(ScalarField::constant(&grid, default)),
            })
            .collect::<Result<Vec<_>>>()
    };
    let k = indexed(loader, &cfg.k, 1.0, "k")?;
    let a = indexed(loader, &cfg.a, 0.0, "a")?;
    let mut p = HiggsProblem::assemble(ws, &grid, entries, k, a)?;
    if !cfg.diag.is_empty() {
        let mut diag = Vec::with_capacity(r);
        for j in 1..=r {
            let (re, im) = cfg.diag.get(&j).cloned().unwrap_or((None, None));
            let mut part = |src: Option<Source>, what: &str| match src {
                Some(s) => loader.field(&s, &format!("diag {j} {what}")),
                None => Ok(ScalarField::zeros(&grid)),
            };
            diag.push((part(re, "re")?, part(im, "im")?));
        }
        p = p.with_diagonal(diag)?;
    }
    Ok(p)
}

/// Named probe directions; `None` marks a request for the Farkas direction.
pub fn probe_directions(cfg: &RunConfig, loader: &mut FieldLoader) -> Result<Vec<(String, Option<Potential>)>> {
    cfg.probe
        .directions
        .iter()
        .map(|(name, dir)| Ok((name.clone(), loader.direction(dir, name)?)))
        .collect()
}
