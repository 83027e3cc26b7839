//! Trace monomials `u^k · v₁^{m₁} v₂^{m₂} ⋯` and the trace-degree grading.
//!
//! `u` stands in for the matrix `U` and `v_l` for the normalized trace
//! `tr(U^l)`. A monomial's trace degree is the number of `U` factors in the
//! function it represents.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct TraceMonomial {
    u_power: u32,
    /// trace power `l ≥ 1` → multiplicity `≥ 1`.
    traces: BTreeMap<u32, u32>,
}

impl TraceMonomial {
    /// The constant monomial `1`.
    pub fn one() -> Self {
        Self::default()
    }

    pub fn u(k: u32) -> Self {
        Self {
            u_power: k,
            traces: BTreeMap::new(),
        }
    }

    /// `v_l`. Panics if `l == 0`.
    pub fn v(l: u32) -> Self {
        Self::new(0, &[l])
    }

    /// `u^k · v_{l₁} ⋯ v_{l_M}`; repeated powers accumulate.
    pub fn new(u_power: u32, trace_powers: &[u32]) -> Self {
        let mut traces = BTreeMap::new();
        for &l in trace_powers {
            assert!(l >= 1, "trace powers start at 1");
            *traces.entry(l).or_insert(0) += 1;
        }
        Self { u_power, traces }
    }

    /// Builds from `(power, multiplicity)` pairs, dropping zero multiplicities.
    pub fn from_factors(u_power: u32, factors: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut traces = BTreeMap::new();
        for (l, m) in factors {
            assert!(l >= 1, "trace powers start at 1");
            if m > 0 {
                *traces.entry(l).or_insert(0) += m;
            }
        }
        Self { u_power, traces }
    }

    pub fn u_power(&self) -> u32 {
        self.u_power
    }

    /// `(power, multiplicity)` pairs in ascending power.
    pub fn traces(&self) -> impl DoubleEndedIterator<Item = (u32, u32)> + '_ {
        self.traces.iter().map(|(&l, &m)| (l, m))
    }

    pub fn multiplicity(&self, l: u32) -> u32 {
        self.traces.get(&l).copied().unwrap_or(0)
    }

    /// `k + Σ l·m_l`.
    pub fn trace_degree(&self) -> u32 {
        self.u_power + self.traces.iter().map(|(l, m)| l * m).sum::<u32>()
    }

    /// Number of trace factors `Σ m_l`.
    pub fn factor_count(&self) -> u32 {
        self.traces.values().sum()
    }

    pub fn is_scalar(&self) -> bool {
        self.u_power == 0
    }

    pub fn is_one(&self) -> bool {
        self.u_power == 0 && self.traces.is_empty()
    }

    /// Trace powers with repetition, largest first; this is the partition
    /// of `trace_degree − u_power` the monomial carries.
    pub fn parts_desc(&self) -> impl Iterator<Item = u32> + '_ {
        self.traces
            .iter()
            .rev()
            .flat_map(|(&l, &m)| std::iter::repeat(l).take(m as usize))
    }

    pub fn with_u_power(&self, k: u32) -> Self {
        Self {
            u_power: k,
            traces: self.traces.clone(),
        }
    }

    /// The scalar part `v_{l₁}⋯v_{l_M}`.
    pub fn scalar_part(&self) -> Self {
        self.with_u_power(0)
    }

    /// Removes one factor `v_l`, if present.
    pub fn without_trace(&self, l: u32) -> Option<Self> {
        let mut out = self.clone();
        match out.traces.get_mut(&l) {
            None => return None,
            Some(1) => {
                out.traces.remove(&l);
            }
            Some(m) => *m -= 1,
        }
        Some(out)
    }

    pub fn with_trace(&self, l: u32) -> Self {
        let mut out = self.clone();
        *out.traces.entry(l).or_insert(0) += 1;
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.u_power += other.u_power;
        for (&l, &m) in &other.traces {
            *out.traces.entry(l).or_insert(0) += m;
        }
        out
    }

    /// Replaces `u^k` by the trace factor `v_k` (the "apply the trace" map).
    pub fn traced(&self) -> Self {
        let mut out = self.scalar_part();
        if self.u_power > 0 {
            *out.traces.entry(self.u_power).or_insert(0) += 1;
        }
        out
    }
}

/// u power descending, then the trace partition in reverse lexicographic
/// order (`v₂` before `v₁²`). Grade bases and all serialized output follow
/// this order.
impl Ord for TraceMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .u_power
            .cmp(&self.u_power)
            .then_with(|| other.parts_desc().cmp(self.parts_desc()))
    }
}

impl PartialOrd for TraceMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for TraceMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut factors = Vec::new();
        match self.u_power {
            0 => {}
            1 => factors.push("u".to_string()),
            k => factors.push(format!("u^{k}")),
        }
        for (&l, &m) in &self.traces {
            factors.push(if m == 1 {
                format!("v{l}")
            } else {
                format!("v{l}^{m}")
            });
        }
        write!(f, "{}", factors.join("*"))
    }
}

impl FromStr for TraceMonomial {
    type Err = Error;

    /// Parses the canonical form written by `Display`, e.g. `u^2*v1*v3^2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "1" {
            return Ok(Self::one());
        }
        let bad = |what: &str| Error::Parse(format!("bad monomial {s:?}: {what}"));
        let mut out = Self::one();
        for factor in s.split('*') {
            let (base, exp) = match factor.split_once('^') {
                Some((b, e)) => (b, e.parse::<u32>().map_err(|_| bad("exponent"))?),
                None => (factor, 1),
            };
            if base == "u" {
                out.u_power += exp;
            } else if let Some(l) = base.strip_prefix('v') {
                let l: u32 = l.parse().map_err(|_| bad("trace index"))?;
                if l == 0 {
                    return Err(bad("v0 is not a variable"));
                }
                if exp > 0 {
                    *out.traces.entry(l).or_insert(0) += exp;
                }
            } else {
                return Err(bad("unknown factor"));
            }
        }
        Ok(out)
    }
}

/// Partitions of `n` with parts at most `max`, in reverse lexicographic order.
fn partitions_into(n: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if n == 0 {
        out.push(prefix.clone());
        return;
    }
    for part in (1..=max.min(n)).rev() {
        prefix.push(part);
        partitions_into(n - part, part, prefix, out);
        prefix.pop();
    }
}

pub fn partitions(n: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    partitions_into(n, n, &mut Vec::new(), &mut out);
    out
}

/// Every monomial of trace degree exactly `k`, in the crate's monomial order:
/// `u^k`, then `u^{k-1}` times each partition of 1, and so on down to the
/// purely scalar monomials.
pub fn grade_basis(k: u32) -> Vec<TraceMonomial> {
    (0..=k)
        .rev()
        .flat_map(|k0| {
            partitions(k - k0)
                .into_iter()
                .map(move |parts| TraceMonomial::new(k0, &parts))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_degree_examples() {
        assert_eq!(TraceMonomial::new(2, &[2, 2]).trace_degree(), 6);
        assert_eq!(TraceMonomial::one().trace_degree(), 0);
        assert_eq!(TraceMonomial::new(0, &[1, 1, 1]).trace_degree(), 3);
    }

    #[test]
    fn grade_two_basis_order() {
        let names: Vec<String> = grade_basis(2).iter().map(ToString::to_string).collect();
        assert_eq!(names, ["u^2", "u*v1", "v2", "v1^2"]);
        assert_eq!(grade_basis(0), vec![TraceMonomial::one()]);
        assert_eq!(grade_basis(1).len(), 2);
        assert_eq!(grade_basis(4).len(), 12);
    }

    #[test]
    fn basis_is_sorted_and_homogeneous() {
        for k in 0..=9 {
            let basis = grade_basis(k);
            assert!(basis.windows(2).all(|w| w[0] < w[1]), "grade {k} out of order");
            assert!(basis.iter().all(|m| m.trace_degree() == k));
        }
    }

    #[test]
    fn grading_is_additive() {
        let all: Vec<TraceMonomial> = (0..=4).flat_map(grade_basis).collect();
        for a in &all {
            for b in &all {
                assert_eq!(a.mul(b).trace_degree(), a.trace_degree() + b.trace_degree());
            }
        }
    }

    #[test]
    fn parse_display_round_trip() {
        for k in 0..=6 {
            for m in grade_basis(k) {
                let back: TraceMonomial = m.to_string().parse().unwrap();
                assert_eq!(back, m);
            }
        }
        assert_eq!("u^2*v1*v3^2".parse::<TraceMonomial>().unwrap(), TraceMonomial::new(2, &[1, 3, 3]));
        assert!("w2".parse::<TraceMonomial>().is_err());
        assert!("v0".parse::<TraceMonomial>().is_err());
    }

    #[test]
    fn factor_removal() {
        let m = TraceMonomial::new(1, &[2, 2, 3]);
        assert_eq!(m.without_trace(2).unwrap(), TraceMonomial::new(1, &[2, 3]));
        assert!(m.without_trace(1).is_none());
        assert_eq!(TraceMonomial::u(3).traced(), TraceMonomial::v(3));
    }
}
