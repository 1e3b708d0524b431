//! The decay-rate sequence and the recursion producing the solution
//! expansion `q_n` from the force expansion `p_n`.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::expansion::{bilinear_expansion, op_r, op_z, time_derivative, Expansion};
use crate::spectral::{bilinear_b_self, Lattice, SpectralField};

/// Increasing decay rates `μ_1 < μ_2 < …` closed under addition (and under
/// `+1` in the power case `m_* = 0`) up to a cutoff.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentSequence {
    m_star: i32,
    generators: Vec<Rational64>,
    cutoff: Rational64,
    mu: Vec<Rational64>,
}

/// Closure of `generators` under addition, plus `+1` when `m_star = 0`,
/// truncated at `cutoff`.
pub fn build_exponent_sequence(generators: &[Rational64], m_star: i32, cutoff: Rational64) -> Result<ExponentSequence> {
    if generators.is_empty() {
        return Err(Error::Sequence("no generators".into()));
    }
    if m_star < 0 {
        return Err(Error::Sequence(format!("m_* = {m_star} must be nonnegative")));
    }
    if let Some(g) = generators.iter().find(|g| **g <= Rational64::zero() || **g > cutoff) {
        return Err(Error::Sequence(format!("generator {g} is not in (0, {cutoff}]")));
    }
    let mut set: BTreeSet<Rational64> = generators.iter().copied().collect();
    loop {
        let current: Vec<Rational64> = set.iter().copied().collect();
        let before = set.len();
        for (i, a) in current.iter().enumerate() {
            for b in &current[i..] {
                let s = a + b;
                if s > cutoff {
                    break;
                }
                set.insert(s);
            }
            if m_star == 0 && a + Rational64::one() <= cutoff {
                set.insert(a + Rational64::one());
            }
        }
        if set.len() == before {
            break;
        }
    }
    Ok(ExponentSequence { m_star, generators: generators.to_vec(), cutoff, mu: set.into_iter().collect() })
}

impl ExponentSequence {
    pub fn m_star(&self) -> i32 {
        self.m_star
    }

    pub fn generators(&self) -> &[Rational64] {
        &self.generators
    }

    pub fn cutoff(&self) -> Rational64 {
        self.cutoff
    }

    pub fn values(&self) -> &[Rational64] {
        &self.mu
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// `μ_n`, counting from `n = 1`.
    pub fn mu(&self, n: usize) -> Result<Rational64> {
        n.checked_sub(1)
            .and_then(|i| self.mu.get(i).copied())
            .ok_or(Error::IndexOutOfRange { index: n as i32, lo: 1, hi: self.mu.len() as i32 })
    }

    /// `n` with `μ_n = mu`.
    pub fn position(&self, mu: Rational64) -> Option<usize> {
        self.mu.binary_search(&mu).ok().map(|i| i + 1)
    }
}

/// Force expansion `f ~ Σ p_n` with `p_n ∈ 𝒫_{m_*}(k, −μ_n)`; rates without
/// an entry have `p_n = 0`.
#[derive(Clone, Debug)]
pub struct ForceExpansionSpec {
    lattice: Arc<Lattice>,
    m_star: i32,
    k: i32,
    forces: Vec<(Rational64, Expansion)>,
}

impl ForceExpansionSpec {
    pub fn new(lattice: &Arc<Lattice>, m_star: i32, k: i32, forces: Vec<(Rational64, Expansion)>) -> Result<Self> {
        if m_star < 0 || m_star > k {
            return Err(Error::Class(format!("need 0 <= m_* <= k, got m_* = {m_star}, k = {k}")));
        }
        let mut seen = BTreeSet::new();
        for (mu, p) in &forces {
            if !seen.insert(*mu) {
                return Err(Error::Config(format!("two force terms for rate {mu}")));
            }
            if !p.lattice().same_as(lattice) {
                return Err(Error::LatticeMismatch);
            }
            if p.depth() != k {
                return Err(Error::DepthMismatch { left: k, right: p.depth() });
            }
            p.classify(m_star, -mu)?;
            p.verify_conjugate_closure()?;
        }
        let forces = forces.into_iter().map(|(mu, p)| Ok((mu, p.with_class(m_star, -mu)?))).collect::<Result<_>>()?;
        Ok(ForceExpansionSpec { lattice: lattice.clone(), m_star, k, forces })
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn m_star(&self) -> i32 {
        self.m_star
    }

    pub fn depth(&self) -> i32 {
        self.k
    }

    pub fn forces(&self) -> &[(Rational64, Expansion)] {
        &self.forces
    }

    /// Rates carrying a force term.
    pub fn rates(&self) -> Vec<Rational64> {
        self.forces.iter().map(|(mu, _)| *mu).collect()
    }

    /// `p_n` for rate `mu` (zero when absent).
    pub fn force_for(&self, mu: Rational64) -> Expansion {
        self.forces
            .iter()
            .find(|(m, _)| *m == mu)
            .map(|(_, p)| p.clone())
            .unwrap_or_else(|| Expansion::zero(&self.lattice, self.k, self.m_star, -mu))
    }

    /// Checks that every rate belongs to `seq`.
    pub fn check_against(&self, seq: &ExponentSequence) -> Result<()> {
        if seq.m_star() != self.m_star {
            return Err(Error::Sequence(format!("sequence built for m_* = {}, force has m_* = {}", seq.m_star(), self.m_star)));
        }
        match self.forces.iter().find(|(mu, _)| seq.position(*mu).is_none()) {
            Some((mu, _)) => Err(Error::MissingExponent(*mu)),
            None => Ok(()),
        }
    }

    /// `Σ_{n <= count} p_n(L̂_k(t))` over the first `count` rates of `seq`.
    pub fn evaluate(&self, seq: &ExponentSequence, count: usize, t: f64) -> Result<SpectralField> {
        let mut f = SpectralField::zeros(&self.lattice);
        for mu in seq.values().iter().take(count) {
            if let Some((_, p)) = self.forces.iter().find(|(m, _)| m == mu) {
                f += &p.evaluate(t)?;
            }
        }
        Ok(f)
    }
}

/// `χ_n = R q_λ` when `μ_λ + 1 = μ_n` for some `λ < n` (power case only).
pub fn resolve_chi(n: usize, seq: &ExponentSequence, q_list: &[Expansion]) -> Result<Option<Expansion>> {
    if seq.m_star() != 0 || n <= 1 {
        return Ok(None);
    }
    let target = seq.mu(n)? - Rational64::one();
    match seq.position(target) {
        Some(lambda) if lambda < n => {
            let q = q_list.get(lambda - 1).ok_or(Error::IndexOutOfRange { index: lambda as i32, lo: 1, hi: q_list.len() as i32 })?;
            Ok(Some(op_r(q)?))
        }
        _ => Ok(None),
    }
}

/// `p_n − Σ_{μ_i + μ_j = μ_n} B_C(q_i, q_j) − χ_n`, the expansion that
/// `(A_C + M_{-1}) q_n` must equal.
pub fn recursion_rhs(n: usize, spec: &ForceExpansionSpec, seq: &ExponentSequence, q_list: &[Expansion]) -> Result<Expansion> {
    let mu_n = seq.mu(n)?;
    let mut rhs = spec.force_for(mu_n);
    for i in 1..n {
        for j in 1..n {
            if seq.mu(i)? + seq.mu(j)? == mu_n {
                rhs = rhs.sub(&bilinear_expansion(&q_list[i - 1], &q_list[j - 1])?)?;
            }
        }
    }
    if let Some(chi) = resolve_chi(n, seq, q_list)? {
        rhs = rhs.sub(&chi)?;
    }
    Ok(rhs)
}

/// `q_1, …, q_count` with `q_n = Z(p_n − Σ B_C(q_i, q_j) − χ_n)`.
pub fn construct_expansion(spec: &ForceExpansionSpec, seq: &ExponentSequence, count: usize) -> Result<Vec<Expansion>> {
    spec.check_against(seq)?;
    if count > seq.len() {
        return Err(Error::Sequence(format!("asked for {count} terms but the sequence has {} rates below its cutoff", seq.len())));
    }
    let mut q_list: Vec<Expansion> = Vec::with_capacity(count);
    for n in 1..=count {
        let mu_n = seq.mu(n)?;
        let q = op_z(&recursion_rhs(n, spec, seq, &q_list)?)?;
        q.classify(spec.m_star, -mu_n)
            .map_err(|e| Error::Class(format!("q_{n}: {e}")))?;
        q.verify_conjugate_closure()
            .map_err(|e| Error::NotConjugateClosed(format!("q_{n}: {e}")))?;
        q_list.push(q);
    }
    Ok(q_list)
}

/// `Σ q_n(L̂_k(t))`.
pub fn evaluate_sum(q_list: &[Expansion], lattice: &Arc<Lattice>, t: f64) -> Result<SpectralField> {
    let mut u = SpectralField::zeros(lattice);
    for q in q_list {
        u += &q.evaluate(t)?;
    }
    Ok(u)
}

/// The force `u' + Au + B(u, u)` for `u = Σ q_n(L̂_k(t))`, under which `u`
/// solves the equation exactly.
pub fn manufactured_force(q_list: &[Expansion], lattice: &Arc<Lattice>, t: f64) -> Result<SpectralField> {
    let u = evaluate_sum(q_list, lattice, t)?;
    let mut f = u.apply_a();
    f += &bilinear_b_self(&u);
    for q in q_list {
        f += &time_derivative(q, t)?;
    }
    Ok(f)
}
