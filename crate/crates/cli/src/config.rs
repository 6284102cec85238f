//! Flat `key = value` configuration merged with command-line flags.

use std::path::{Path, PathBuf};

use quadrelax::{
    lorentzian_spectral_densities, quadrupolar_constant_simplified, QuadrupolarConstant, SpectralDensities,
};

use crate::args::{Cli, EquilibriumKind, PhysicsArgs};
use crate::error::{CliError, CliResult};

/// Values read from a configuration file. Relative paths are resolved
/// against the file's directory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub physics: PhysicsArgs,
    pub long: Option<PathBuf>,
    pub trans: Option<PathBuf>,
    pub curve: Option<PathBuf>,
    pub init: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::data(path, None, e.to_string()))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> CliResult<Self> {
        let base = path.parent().unwrap_or(Path::new(""));
        let mut cfg = ConfigFile::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let bad = |msg: String| CliError::data(path, Some(line), msg);
            let (key, value) = content.split_once('=').ok_or_else(|| bad(format!("expected `key = value`, got '{content}'")))?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(bad(format!("missing value for '{key}'")));
            }
            let num = |v: &str| v.parse::<f64>().map_err(|_| bad(format!("'{key}' needs a number, got '{v}'")));
            let p = &mut cfg.physics;
            match key {
                "spin" => p.spin = Some(parse_spin(value).ok_or_else(|| bad(format!("bad spin '{value}'")))?),
                "larmor_freq" => p.larmor_freq = Some(num(value)?),
                "quad_freq" => p.quad_freq = Some(num(value)?),
                "correlation_time" => p.correlation_time = Some(num(value)?),
                "j0" => p.j0 = Some(num(value)?),
                "j1" => p.j1 = Some(num(value)?),
                "j2" => p.j2 = Some(num(value)?),
                "c" => p.c = Some(num(value)?),
                "equilibrium" => {
                    p.equilibrium =
                        Some(EquilibriumKind::parse_key(value).ok_or_else(|| bad(format!("unknown equilibrium '{value}'")))?)
                }
                "equilibrium_file" => p.equilibrium_file = Some(base.join(value)),
                "long" => cfg.long = Some(base.join(value)),
                "trans" => cfg.trans = Some(base.join(value)),
                "curve" => cfg.curve = Some(base.join(value)),
                "init" => cfg.init = Some(value.to_string()),
                "out" => cfg.out = Some(base.join(value)),
                "seed" => cfg.seed = Some(value.parse().map_err(|_| bad(format!("bad seed '{value}'")))?),
                _ => return Err(bad(format!("unknown key '{key}'"))),
            }
        }
        Ok(cfg)
    }
}

/// Accepts `7`, `7/2` or `3.5` and returns two_I.
fn parse_spin(s: &str) -> Option<u32> {
    if let Some(num) = s.strip_suffix("/2") {
        return num.trim().parse().ok();
    }
    if let Ok(v) = s.parse::<u32>() {
        return Some(v);
    }
    let x: f64 = s.parse().ok()?;
    let two = 2.0 * x;
    (two.fract() == 0.0 && two > 0.0).then_some(two as u32)
}

/// Physics and I/O inputs after merging file and flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spin: u32,
    pub larmor_freq: Option<f64>,
    pub quad_freq: Option<f64>,
    pub correlation_time: Option<f64>,
    pub densities: Option<[f64; 3]>,
    pub c_override: Option<f64>,
    pub equilibrium: Option<EquilibriumKind>,
    pub equilibrium_file: Option<PathBuf>,
    pub long: Option<PathBuf>,
    pub trans: Option<PathBuf>,
    pub curve: Option<PathBuf>,
    pub init: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub raw: bool,
}

impl RunConfig {
    pub fn resolve(cli: &Cli) -> CliResult<Self> {
        let file = match &cli.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let f = &file.physics;
        let a = &cli.physics;
        // a density source given on the command line replaces the file's
        let flag_source = a.correlation_time.is_some() || a.j0.is_some() || a.j1.is_some() || a.j2.is_some();
        let src = if flag_source { a } else { f };
        let j = [src.j0, src.j1, src.j2];
        let densities = match j {
            [None, None, None] => None,
            [Some(j0), Some(j1), Some(j2)] => Some([j0, j1, j2]),
            _ => return Err(CliError::Usage("spectral densities need all of j0, j1 and j2".into())),
        };
        let (long, trans) = match &cli.command {
            crate::args::Command::Fit(x) => (x.long.clone(), x.trans.clone()),
            crate::args::Command::Bloch(x) => (x.long.clone(), x.trans.clone()),
            _ => (None, None),
        };
        let (long, trans) = match (long, trans) {
            // an explicit curve flag replaces both configured curves for bloch
            (None, None) => (file.long.clone(), file.trans.clone()),
            (l, t) if matches!(cli.command, crate::args::Command::Bloch(_)) => (l, t),
            (l, t) => (l.or(file.long.clone()), t.or(file.trans.clone())),
        };
        let (curve, init) = match &cli.command {
            crate::args::Command::Ilt(x) => (x.curve.clone(), None),
            crate::args::Command::Fit(x) => (None, x.init.clone().or(file.init.clone())),
            _ => (None, None),
        };
        Ok(Self {
            spin: a.spin.or(f.spin).unwrap_or(7),
            larmor_freq: a.larmor_freq.or(f.larmor_freq),
            quad_freq: a.quad_freq.or(f.quad_freq),
            correlation_time: src.correlation_time,
            densities,
            c_override: a.c.or(f.c),
            equilibrium: a.equilibrium.or(f.equilibrium),
            equilibrium_file: a.equilibrium_file.clone().or(f.equilibrium_file.clone()),
            long,
            trans,
            curve: curve.or(file.curve.clone()),
            init,
            out: cli.out.clone().or(file.out.clone()),
            seed: cli.seed.or(file.seed),
            raw: cli.raw,
        })
    }

    /// Exactly one of correlation time and explicit densities.
    pub fn densities(&self) -> CliResult<SpectralDensities> {
        match (self.correlation_time, self.densities) {
            (Some(tc), None) => {
                let nu = self
                    .larmor_freq
                    .ok_or_else(|| CliError::Usage("correlation_time needs larmor_freq".into()))?;
                Ok(lorentzian_spectral_densities(nu, tc)?)
            }
            (None, Some([j0, j1, j2])) => Ok(SpectralDensities::new(j0, j1, j2)?),
            (Some(_), Some(_)) => {
                Err(CliError::Usage("give either correlation_time or j0/j1/j2, not both".into()))
            }
            (None, None) => Err(CliError::Usage("spectral densities missing: give correlation_time or j0/j1/j2".into())),
        }
    }

    pub fn has_densities(&self) -> bool {
        self.correlation_time.is_some() || self.densities.is_some()
    }

    pub fn quadrupolar_constant(&self) -> CliResult<QuadrupolarConstant> {
        if let Some(c) = self.c_override {
            return Ok(QuadrupolarConstant::user_supplied(c)?);
        }
        let nu = self.quad_freq.ok_or_else(|| CliError::Usage("quadrupolar constant missing: give quad_freq or c".into()))?;
        Ok(quadrupolar_constant_simplified(nu)?)
    }

    pub fn require_spin(&self) -> CliResult<()> {
        if self.spin != 7 {
            return Err(quadrelax::Error::UnsupportedSpin(self.spin).into());
        }
        Ok(())
    }
}
