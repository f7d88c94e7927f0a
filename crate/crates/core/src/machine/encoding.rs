//! Counter encodings as clock values and nearest-encoding searches.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("target must be positive, got {0}")]
pub struct DomainError(pub String);

/// `1 − 1/(2^c · 3^d · 5^n)`.
pub fn encode(c: u32, d: u32, n: u32) -> Rational {
    rational::one() - (rational::pow(2, c) * rational::pow(3, d) * rational::pow(5, n)).recip()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub c: u32,
    pub d: u32,
    pub mu: Rational,
    /// `encode(c, d, p) − a`.
    pub delta: Rational,
}

/// Nearest valid encoding with `c + d ≤ p` after `p` steps.
/// Ties go to the smaller `c`, then the smaller `d`.
pub fn decode_best(a: &Rational, p: u32) -> Decoded {
    let mut best: Option<Decoded> = None;
    for c in 0..=p {
        for d in 0..=(p - c) {
            let delta = encode(c, d, p) - a;
            let mu = delta.abs();
            if best.as_ref().is_none_or(|b| mu < b.mu) {
                best = Some(Decoded { c, d, mu, delta });
            }
        }
    }
    best.expect("c = d = 0 is always a candidate")
}

/// A set `{ 1/(b₁^e₁ ··· bₘ^eₘ) : eᵢ ≥ minᵢ }` of reciprocal products.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Family {
    pub bases: Vec<(u32, u32)>,
}

impl Family {
    /// `{ 1/((4−k)^d 5^n) }`.
    pub fn zero_control(k: u32) -> Family {
        Family {
            bases: vec![(4 - k, 0), (5, 0)],
        }
    }

    /// `{ 1/((k+1)^c (4−k)^d 5^n) : c ≥ 1 }`.
    pub fn nonzero_control(k: u32) -> Family {
        Family {
            bases: vec![(k + 1, 1), (4 - k, 0), (5, 0)],
        }
    }

    /// Same products without the lower bound on the first exponent.
    pub fn relaxed(&self) -> Family {
        Family {
            bases: self.bases.iter().map(|&(b, _)| (b, 0)).collect(),
        }
    }

    pub fn value(&self, exps: &[u32]) -> Rational {
        self.bases
            .iter()
            .zip(exps)
            .fold(rational::one(), |acc, (&(b, _), &e)| {
                acc * rational::inv_pow(b as i64, e)
            })
    }

    fn largest_prime(&self) -> u32 {
        self.bases.iter().map(|&(b, _)| b).max().unwrap_or(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nearest {
    pub exps: Vec<u32>,
    pub value: Rational,
    /// `value − a`.
    pub delta: Rational,
    pub dist: Rational,
}

/// Exact nearest member of `family` to `a > 0`.
///
/// Both the largest member `≤ a` and the smallest member `≥ a` have a
/// denominator at most `⌈p/a⌉` where `p` is the largest base, so the search
/// enumerates all exponent tuples below that bound. Ties keep the
/// lexicographically smallest exponent tuple.
pub fn nearest_member(a: &Rational, family: &Family) -> Result<Nearest, DomainError> {
    if !a.is_positive() {
        return Err(DomainError(rational::fmt(a)));
    }
    let bound = rational::ceil_int(&(rational::int(family.largest_prime() as i64) / a));
    let mut best: Option<Nearest> = None;
    let mut exps = vec![0u32; family.bases.len()];
    search(family, a, &bound, 0, BigInt::one(), &mut exps, &mut best);
    Ok(best.expect("the minimal member is within the bound"))
}

fn search(
    family: &Family,
    a: &Rational,
    bound: &BigInt,
    i: usize,
    denom: BigInt,
    exps: &mut Vec<u32>,
    best: &mut Option<Nearest>,
) {
    if i == family.bases.len() {
        let value = Rational::new(BigInt::one(), denom);
        let delta = &value - a;
        let dist = delta.abs();
        if best.as_ref().is_none_or(|b| dist < b.dist) {
            *best = Some(Nearest {
                exps: exps.clone(),
                value,
                delta,
                dist,
            });
        }
        return;
    }
    let (base, min) = family.bases[i];
    let base = BigInt::from(base);
    let mut d = denom * num_traits::pow(base.clone(), min as usize);
    let mut e = min;
    // the minimal tuple is always kept so the family is never empty
    let forced = exps[..i]
        .iter()
        .zip(&family.bases)
        .all(|(&x, &(_, m))| x == m);
    while &d <= bound || (forced && e == min) {
        exps[i] = e;
        search(family, a, bound, i + 1, d.clone(), exps, best);
        if d.is_zero() {
            break;
        }
        d *= &base;
        e += 1;
    }
    exps[i] = 0;
}

/// `min { |1/((4−k)^d 5^n) − a| }`.
pub fn mu_zero(a: &Rational, k: u32) -> Result<Rational, DomainError> {
    Ok(nearest_member(a, &Family::zero_control(k))?.dist)
}

/// `min { |1/((k+1)^c (4−k)^d 5^n) − a| : c ≥ 1 }`.
pub fn mu_nonzero(a: &Rational, k: u32) -> Result<Rational, DomainError> {
    Ok(nearest_member(a, &Family::nonzero_control(k))?.dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    /// Independent oracle: every tuple with exponents up to `cap`.
    fn brute_mu(a: &Rational, family: &Family, cap: u32) -> Rational {
        fn go(
            f: &Family,
            a: &Rational,
            i: usize,
            exps: &mut Vec<u32>,
            cap: u32,
            best: &mut Option<Rational>,
        ) {
            if i == f.bases.len() {
                let d = (f.value(exps) - a).abs();
                if best.as_ref().is_none_or(|b| d < *b) {
                    *best = Some(d);
                }
                return;
            }
            for e in f.bases[i].1..=cap {
                exps[i] = e;
                go(f, a, i + 1, exps, cap, best);
            }
        }
        let mut best = None;
        go(
            family,
            a,
            0,
            &mut vec![0; family.bases.len()],
            cap,
            &mut best,
        );
        best.unwrap()
    }

    #[test]
    fn encode_examples() {
        assert_eq!(encode(0, 0, 0), int(0));
        assert_eq!(encode(0, 0, 1), ratio(4, 5));
        assert_eq!(encode(1, 1, 3), ratio(749, 750));
    }

    #[test]
    fn decode_examples() {
        let d = decode_best(&ratio(49, 50), 2);
        assert_eq!((d.c, d.d, d.mu, d.delta), (1, 0, int(0), int(0)));
        let d = decode_best(&int(0), 0);
        assert_eq!((d.c, d.d, d.mu.clone(), d.delta), (0, 0, int(0), int(0)));
        let a = ratio(9, 10) - ratio(1, 1000);
        let d = decode_best(&a, 1);
        assert_eq!((d.c, d.d), (1, 0));
        assert_eq!(d.mu, ratio(1, 1000));
        assert_eq!(d.delta, ratio(1, 1000));
    }

    #[test]
    fn mu_examples() {
        assert_eq!(mu_zero(&ratio(1, 5), 1).unwrap(), int(0));
        assert_eq!(mu_zero(&ratio(1, 10), 1).unwrap(), ratio(1, 90));
        assert_eq!(mu_zero(&int(1), 2).unwrap(), int(0));
        assert_eq!(mu_nonzero(&ratio(1, 2), 1).unwrap(), int(0));
        assert_eq!(mu_nonzero(&ratio(1, 5), 1).unwrap(), ratio(1, 30));
        assert_eq!(mu_nonzero(&ratio(1, 3), 2).unwrap(), int(0));
        assert!(mu_zero(&int(0), 1).is_err());
        assert!(mu_nonzero(&ratio(-1, 2), 1).is_err());
    }

    #[test]
    fn bounded_search_matches_brute_force_on_grid() {
        for k in 1..=2 {
            for fam in [Family::zero_control(k), Family::nonzero_control(k)] {
                for den in 1..=24i64 {
                    for num in 1..=den {
                        let a = ratio(num, den);
                        let fast = nearest_member(&a, &fam).unwrap();
                        assert_eq!(fast.dist, brute_mu(&a, &fam, 8), "a={a} fam={fam:?}");
                        assert_eq!(fast.value, fam.value(&fast.exps));
                        // zero distance exactly when a is itself a member
                        let is_member =
                            a.numer() == &BigInt::one() && brute_mu(&a, &fam, 8).is_zero();
                        assert_eq!(fast.dist.is_zero(), is_member);
                    }
                }
            }
        }
    }

    #[test]
    fn tiny_targets_stay_finite() {
        let a = rational::inv_pow(30, 10) + rational::inv_pow(30, 20);
        let n = nearest_member(&a, &Family::nonzero_control(2)).unwrap();
        assert!(n.dist < a);
    }
}
