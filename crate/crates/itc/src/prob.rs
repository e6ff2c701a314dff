//! Exact probabilistic interpretation of `Rnd`-trees as finitely supported
//! rational sub-distributions.
//!
//! `semp_n` is the n-step approximation: zero steps give the null
//! distribution, `Ret` gives a unit mass, `Tau` shifts the index, and a
//! `Rnd(v)` node averages its continuations over all `2^(chunk_bits * v)`
//! answer vectors. The approximations are pointwise increasing in `n`, so
//! the reported residual mass bounds the distance to the limit. Divergence
//! never contributes mass. Error events route their weight into a separate
//! diagnostic bucket instead of being rejected.
//!
//! All arithmetic is exact: there is no floating point anywhere in
//! distribution math, so preservation checks can compare with tolerance
//! zero.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::itree::{Answer, Event, ITree, Node, Res};

/// A finitely supported exact sub-distribution with an error bucket.
/// Invariant: all masses are non-negative and
/// `returned + residual + error = 1` with `residual >= 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dist<R: Ord> {
    mass: BTreeMap<R, BigRational>,
    error: BigRational,
}

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `1 / 2^bits`.
pub fn inv_pow2(bits: u64) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << bits)
}

impl<R: Ord + Clone> Dist<R> {
    /// The null distribution: zero probability everywhere.
    pub fn null() -> Dist<R> {
        Dist { mass: BTreeMap::new(), error: BigRational::zero() }
    }

    /// The unit distribution on `r`.
    pub fn unit(r: R) -> Dist<R> {
        let mut mass = BTreeMap::new();
        mass.insert(r, BigRational::one());
        Dist { mass, error: BigRational::zero() }
    }

    fn error_unit() -> Dist<R> {
        Dist { mass: BTreeMap::new(), error: BigRational::one() }
    }

    fn add_scaled(&mut self, other: &Dist<R>, factor: &BigRational) {
        for (r, p) in &other.mass {
            let entry = self.mass.entry(r.clone()).or_insert_with(BigRational::zero);
            *entry += p * factor;
        }
        self.error += &other.error * factor;
    }

    pub fn support(&self) -> impl Iterator<Item = (&R, &BigRational)> {
        self.mass.iter()
    }

    pub fn mass_of(&self, r: &R) -> BigRational {
        self.mass.get(r).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Total mass of returned results (excluding the error bucket).
    pub fn returned_mass(&self) -> BigRational {
        self.mass.values().fold(BigRational::zero(), |acc, p| acc + p)
    }

    pub fn error_mass(&self) -> BigRational {
        self.error.clone()
    }

    /// `1 - returned - error`: the mass not yet accounted for at this
    /// approximation index.
    pub fn residual(&self) -> BigRational {
        BigRational::one() - self.returned_mass() - &self.error
    }

    /// Probability of the subset carved out by `pred`.
    pub fn pr_set(&self, mut pred: impl FnMut(&R) -> bool) -> BigRational {
        self.mass
            .iter()
            .filter(|(r, _)| pred(r))
            .fold(BigRational::zero(), |acc, (_, p)| acc + p)
    }

    /// Push-forward along `f` (masses of colliding images add up).
    pub fn map<S: Ord + Clone>(&self, mut f: impl FnMut(&R) -> S) -> Dist<S> {
        let mut out = Dist::null();
        for (r, p) in &self.mass {
            let entry = out.mass.entry(f(r)).or_insert_with(BigRational::zero);
            *entry += p;
        }
        out.error = self.error.clone();
        out
    }

    /// Drops zero-mass entries; masses themselves are untouched.
    pub fn prune(mut self) -> Dist<R> {
        self.mass.retain(|_, p| !p.is_zero());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProbError {
    #[error("unsupported event in probabilistic interpretation: {0}")]
    UnsupportedEvent(String),
    #[error("Rnd({chunks}) at {chunk_bits} chunk bits exceeds the exact-mode limit of {limit} bits")]
    ExactModeOverflow { chunks: u64, chunk_bits: u32, limit: u32 },
}

/// Parameters of the exact interpretation.
#[derive(Clone, Copy, Debug)]
pub struct ProbConfig {
    pub chunk_bits: u32,
    /// Maximum random bits a single `Rnd` event may draw in exact mode.
    pub exact_mode_limit: u32,
}

impl ProbConfig {
    pub fn new(chunk_bits: u32) -> ProbConfig {
        ProbConfig { chunk_bits, exact_mode_limit: 16 }
    }
}

/// The n-step approximation of the distribution denoted by `t`.
pub fn semp_n<R: Res + Ord>(t: &ITree<R>, n: u64, cfg: &ProbConfig) -> Result<Dist<R>, ProbError> {
    let mut cur = t.clone();
    let mut n = n;
    loop {
        if n == 0 {
            return Ok(Dist::null());
        }
        match cur.node() {
            Node::Ret(r) => return Ok(Dist::unit(r.clone())),
            Node::Tau(rest) => {
                let rest = rest.clone();
                cur = rest;
                n -= 1;
            }
            Node::Vis(Event::Err(_), _) => return Ok(Dist::error_unit()),
            Node::Vis(Event::Rnd(v), k) => {
                let bits = *v * cfg.chunk_bits as u64;
                if bits > cfg.exact_mode_limit as u64 {
                    return Err(ProbError::ExactModeOverflow {
                        chunks: *v,
                        chunk_bits: cfg.chunk_bits,
                        limit: cfg.exact_mode_limit,
                    });
                }
                let weight = inv_pow2(bits);
                let mut acc = Dist::null();
                for chunks in crate::equiv::enumerate_chunk_vectors(*v, cfg.chunk_bits) {
                    let branch = semp_n(&k(&Answer::Chunks(chunks)), n - 1, cfg)?;
                    acc.add_scaled(&branch, &weight);
                }
                return Ok(acc.prune());
            }
            Node::Vis(e, _) => {
                return Err(ProbError::UnsupportedEvent(format!("{e:?}")));
            }
        }
    }
}

/// Convergence data reported alongside an approximated distribution.
#[derive(Clone, Debug, Serialize)]
pub struct Convergence {
    pub n_used: u64,
    /// Residual mass as an exact rational rendered `num/den`.
    pub residual: String,
    pub converged: bool,
}

/// Computes `semp_n` on a doubling schedule up to `n_max`, stopping early
/// when the residual hits zero or the landed mass moves by less than `eps`
/// between `n` and `2n`. The residual is reported, never extrapolated.
pub fn semp<R: Res + Ord>(
    t: &ITree<R>,
    n_max: u64,
    eps: &BigRational,
    cfg: &ProbConfig,
) -> Result<(Dist<R>, Convergence), ProbError> {
    assert!(n_max >= 1);
    let mut n: u64 = 1;
    let mut d = semp_n(t, n, cfg)?;
    loop {
        let residual = d.residual();
        if residual.is_zero() || n >= n_max {
            let conv = Convergence {
                n_used: n,
                residual: residual.to_string(),
                converged: residual.is_zero(),
            };
            return Ok((d, conv));
        }
        let next_n = (n * 2).min(n_max);
        let next = semp_n(t, next_n, cfg)?;
        let landed_now = next.returned_mass() + next.error_mass();
        let landed_before = d.returned_mass() + d.error_mass();
        let delta = &landed_now - landed_before;
        d = next;
        // The delta rule only applies once mass has started landing,
        // otherwise slow starters would be cut off at n = 2.
        if next_n == n * 2 && !landed_now.is_zero() && &delta < eps && !d.residual().is_zero() {
            let conv = Convergence {
                n_used: next_n,
                residual: d.residual().to_string(),
                converged: false,
            };
            return Ok((d, conv));
        }
        n = next_n;
    }
}

/// Outcome of the set-lifted distribution comparison.
#[derive(Clone, Debug)]
pub enum LiftedVerdict {
    Equal { pr_left: BigRational, pr_right: BigRational, residual_left: BigRational, residual_right: BigRational },
    NotEqual { pr_left: BigRational, pr_right: BigRational },
    SideConditionViolated { left: crate::lang::MachState, right: crate::lang::MachState },
}

/// Compares `Pr[semp t1 in S]` with `Pr[semp t2 in T]` at equal step
/// budgets, after checking the membership-equivalence side condition on the
/// supplied simulation-related state pairs.
pub fn lifted_equality_check(
    t1: &ITree<crate::lang::MachState>,
    t2: &ITree<crate::lang::MachState>,
    related_pairs: &[(crate::lang::MachState, crate::lang::MachState)],
    s_pred: impl Fn(&crate::lang::MachState) -> bool,
    t_pred: impl Fn(&crate::lang::MachState) -> bool,
    n: u64,
    cfg: &ProbConfig,
) -> Result<LiftedVerdict, ProbError> {
    for (l, r) in related_pairs {
        if s_pred(l) != t_pred(r) {
            return Ok(LiftedVerdict::SideConditionViolated { left: l.clone(), right: r.clone() });
        }
    }
    let d1 = semp_n(t1, n, cfg)?;
    let d2 = semp_n(t2, n, cfg)?;
    let pr_left = d1.pr_set(|s| s_pred(s));
    let pr_right = d2.pr_set(|s| t_pred(s));
    if pr_left == pr_right {
        Ok(LiftedVerdict::Equal {
            pr_left,
            pr_right,
            residual_left: d1.residual(),
            residual_right: d2.residual(),
        })
    } else {
        Ok(LiftedVerdict::NotEqual { pr_left, pr_right })
    }
}

/// JSON form of a distribution: entries plus residual and error masses.
#[derive(Clone, Debug, Serialize)]
pub struct DistJson {
    pub entries: Vec<DistEntry>,
    pub residual: RatJson,
    pub error: RatJson,
}

#[derive(Clone, Debug, Serialize)]
pub struct DistEntry {
    pub value: String,
    pub numerator: String,
    pub denominator: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RatJson {
    pub numerator: String,
    pub denominator: String,
}

pub fn rat_json(r: &BigRational) -> RatJson {
    RatJson { numerator: r.numer().to_string(), denominator: r.denom().to_string() }
}

impl<R: Ord + Clone> Dist<R> {
    pub fn to_json(&self, mut render: impl FnMut(&R) -> String) -> DistJson {
        DistJson {
            entries: self
                .mass
                .iter()
                .map(|(r, p)| DistEntry {
                    value: render(r),
                    numerator: p.numer().to_string(),
                    denominator: p.denom().to_string(),
                })
                .collect(),
            residual: rat_json(&self.residual()),
            error: rat_json(&self.error),
        }
    }
}
