//! The first-return map `T_km` near a pair of quadratic homoclinic tangencies.

use super::global::GlobalMapTaylor;
use super::local::{local_iterate, LocalNormalForm, Point};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ordering {
    /// `T2 ∘ T0^m ∘ T1 ∘ T0^k`, starting on the section near `T2`'s image.
    KGeqM,
    /// `T1 ∘ T0^k ∘ T2 ∘ T0^m`, starting on the section near `T1`'s image.
    KLtM,
}

impl Ordering {
    pub fn for_pair(k: usize, m: usize) -> Self {
        if k >= m {
            Ordering::KGeqM
        } else {
            Ordering::KLtM
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Ordering::KGeqM => "k-geq-m",
            Ordering::KLtM => "k-lt-m",
        }
    }
}

impl std::str::FromStr for Ordering {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "k-geq-m" | "kgeqm" => Ok(Ordering::KGeqM),
            "k-lt-m" | "kltm" => Ok(Ordering::KLtM),
            other => invalid(format!("unknown ordering '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnMapConfig {
    pub local: LocalNormalForm,
    pub t1: GlobalMapTaylor,
    pub t2: GlobalMapTaylor,
    pub k: usize,
    pub m: usize,
    pub ordering: Ordering,
}

/// Intermediate points of one pass through the composition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stages {
    pub after_first_local: Point,
    pub after_first_global: Point,
    pub after_second_local: Point,
    pub output: Point,
}

impl ReturnMapConfig {
    pub fn new(
        local: LocalNormalForm,
        t1: GlobalMapTaylor,
        t2: GlobalMapTaylor,
        k: usize,
        m: usize,
    ) -> Result<Self> {
        Self::with_ordering(local, t1, t2, k, m, Ordering::for_pair(k, m))
    }

    pub fn with_ordering(
        local: LocalNormalForm,
        t1: GlobalMapTaylor,
        t2: GlobalMapTaylor,
        k: usize,
        m: usize,
        ordering: Ordering,
    ) -> Result<Self> {
        if k == 0 || m == 0 {
            return invalid(format!("k and m must be positive, got k={k}, m={m}"));
        }
        if ordering != Ordering::for_pair(k, m) {
            return invalid(format!("ordering {} inconsistent with k={k}, m={m}", ordering.name()));
        }
        t1.validate()?;
        t2.validate()?;
        if !local.is_focus() && !(t1.is_scalar() && t2.is_scalar()) {
            return invalid("saddle configuration requires scalar global coefficients");
        }
        Ok(Self {
            local,
            t1,
            t2,
            k,
            m,
            ordering,
        })
    }

    /// Benchmark: `λ = 0.4`, `γ = 2`, unit global coefficients, `μ = 0`.
    pub fn benchmark_saddle(k: usize, m: usize) -> Result<Self> {
        let local = LocalNormalForm::saddle(0.4, 2.0, 1.0)?;
        let g = GlobalMapTaylor::unit_saddle();
        Self::new(local, g, g, k, m)
    }

    /// `(k, m, first global, second global)` in the order they are applied:
    /// `T0^k`, then the first global map, `T0^m`, then the second.
    pub(crate) fn oriented(&self) -> (usize, usize, &GlobalMapTaylor, &GlobalMapTaylor) {
        match self.ordering {
            Ordering::KGeqM => (self.k, self.m, &self.t1, &self.t2),
            Ordering::KLtM => (self.m, self.k, &self.t2, &self.t1),
        }
    }

    pub fn with_mu(mut self, mu1: f64, mu2: f64) -> Self {
        self.t1.mu = mu1;
        self.t2.mu = mu2;
        self
    }
}

fn stage(p: Point, stage: usize, what: &'static str) -> Result<Point> {
    if p.is_bounded() {
        Ok(p)
    } else {
        Err(Error::StageEscape { stage, what })
    }
}

/// One pass through the composition with every intermediate point.
pub fn first_return_stages(cfg: &ReturnMapConfig, p: Point) -> Result<Stages> {
    if cfg.k == 0 || cfg.m == 0 {
        return invalid("k and m must be positive");
    }
    let (n1, n2, g1, g2) = cfg.oriented();
    let names = match cfg.ordering {
        Ordering::KGeqM => ["T0^k", "T1", "T0^m", "T2"],
        Ordering::KLtM => ["T0^m", "T2", "T0^k", "T1"],
    };
    let s1 = local_iterate(&cfg.local, p, n1).map_err(|_| Error::StageEscape {
        stage: 1,
        what: names[0],
    })?;
    let s2 = stage(g1.apply(&s1), 2, names[1])?;
    let s3 = local_iterate(&cfg.local, s2, n2).map_err(|_| Error::StageEscape {
        stage: 3,
        what: names[2],
    })?;
    let s4 = stage(g2.apply(&s3), 4, names[3])?;
    Ok(Stages {
        after_first_local: s1,
        after_first_global: s2,
        after_second_local: s3,
        output: s4,
    })
}

/// `T_km(p)` in the original coordinates.
pub fn first_return(cfg: &ReturnMapConfig, p: Point) -> Result<Point> {
    if !p.is_bounded() {
        return invalid("first-return input is not finite");
    }
    first_return_stages(cfg, p).map(|s| s.output)
}
