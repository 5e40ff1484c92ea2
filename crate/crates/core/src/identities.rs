//! Exact-rational verification of the algebraic identities behind the
//! determinant representation: the permutation-sum identity that collapses
//! the series into a single symmetric integrand, the Cauchy-type
//! determinant evaluation, and the τ-binomial generating-function sum.
//!
//! Both sides of each identity are rational functions of bounded degree, so
//! exact agreement at sufficiently many random rational points is a
//! complete check, not a sampling heuristic: a nonzero rational function of
//! total degree d cannot vanish at more points than a measure-zero set, and
//! the sampled points are drawn from a large finite grid where the
//! zero-set fraction is bounded by d over the grid side (Schwartz-Zippel).
//! Twenty independent points per dimension k leave the failure odds of a
//! wrong identity far below 2^-60.

use crate::params::{rational_pow, tau_binomial_exact};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IdentityError {
    #[error("a denominator vanishes at this point; resample")]
    DegeneratePoint,
    #[error("identity requires tau != 1")]
    TauOne,
    #[error("k = {0} out of supported range 1..=6")]
    BadDimension(usize),
    #[error("series argument |z| must be < 1 for convergence")]
    DivergentArgument,
    #[error("could not sample an admissible point in {0} tries")]
    SamplingFailed(usize),
}

/// A rational evaluation point: k distinct ξ values plus rates p + q = 1
/// and density ρ, all exact.
#[derive(Debug, Clone)]
pub struct RationalPoint {
    pub xi: Vec<BigRational>,
    pub p: BigRational,
    pub q: BigRational,
    pub rho: BigRational,
}

impl RationalPoint {
    pub fn tau(&self) -> BigRational {
        &self.p / &self.q
    }

    pub fn dimension(&self) -> usize {
        self.xi.len()
    }
}

// a_j = 1 - rho + rho * tau^j
fn tail_constant(j: i64, rho: &BigRational, tau: &BigRational) -> BigRational {
    BigRational::one() - rho + rational_pow(tau, j) * rho
}

// p + q*xi_a*xi_b - xi_a
fn pair_denominator(
    p: &BigRational,
    q: &BigRational,
    a: &BigRational,
    b: &BigRational,
) -> BigRational {
    p + q * a * b - a
}

/// Runs `visit(perm, sign)` over all permutations of 0..k with their signs
/// (Heap's algorithm; each transposition flips the sign).
fn for_each_permutation(k: usize, mut visit: impl FnMut(&[usize], i8)) {
    let mut perm: Vec<usize> = (0..k).collect();
    let mut counters = vec![0usize; k];
    let mut sign: i8 = 1;
    visit(&perm, sign);
    let mut i = 0;
    while i < k {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            sign = -sign;
            visit(&perm, sign);
            counters[i] += 1;
            i = 0;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
}

/// Left side of the permutation-sum identity: the signed sum over S_k of
/// Π_{i<j} 1/(p + qξ_{σ(i)}ξ_{σ(j)} − ξ_{σ(i)}) times the nested tail
/// factors Π_i 1/(ξ_{σ(i)}···ξ_{σ(k)} − a_{k−i+1}) with a_j = 1−ρ+ρτ^j.
pub fn combinatorial_identity_sum(point: &RationalPoint) -> Result<BigRational, IdentityError> {
    let k = point.dimension();
    if k == 0 || k > 6 {
        return Err(IdentityError::BadDimension(k));
    }
    let tau = point.tau();
    // precompute pair denominators and tail constants
    let mut pair = vec![BigRational::zero(); k * k];
    for a in 0..k {
        for b in 0..k {
            if a != b {
                pair[a * k + b] = pair_denominator(&point.p, &point.q, &point.xi[a], &point.xi[b]);
                if pair[a * k + b].is_zero() {
                    return Err(IdentityError::DegeneratePoint);
                }
            }
        }
    }
    let tails: Vec<BigRational> = (1..=k as i64)
        .map(|j| tail_constant(j, &point.rho, &tau))
        .collect();

    let mut total = BigRational::zero();
    let mut degenerate = false;
    for_each_permutation(k, |perm, sign| {
        if degenerate {
            return;
        }
        let mut term = BigRational::one();
        for i in 0..k {
            for j in i + 1..k {
                term /= &pair[perm[i] * k + perm[j]];
            }
        }
        // suffix products xi_{sigma(i)} ... xi_{sigma(k)}
        let mut suffix = BigRational::one();
        for i in (0..k).rev() {
            suffix *= &point.xi[perm[i]];
            // position i (0-based) pairs with a_{k-i}
            let den = &suffix - &tails[k - i - 1];
            if den.is_zero() {
                degenerate = true;
                return;
            }
            term /= den;
        }
        if sign > 0 {
            total += term;
        } else {
            total -= term;
        }
    });
    if degenerate {
        return Err(IdentityError::DegeneratePoint);
    }
    Ok(total)
}

/// Right side of the same identity: the closed product form
/// q^{k(k−1)/2} Π_{i<j}(ξ_i−ξ_j) / (Π_i(ξ_i−1+ρ(1−τ)) · Π_{i≠j}(p+qξ_iξ_j−ξ_i)).
pub fn combinatorial_identity_product(point: &RationalPoint) -> Result<BigRational, IdentityError> {
    let k = point.dimension();
    if k == 0 || k > 6 {
        return Err(IdentityError::BadDimension(k));
    }
    let tau = point.tau();
    let one = BigRational::one();
    let mut num = rational_pow(&point.q, (k * (k - 1) / 2) as i64);
    for i in 0..k {
        for j in i + 1..k {
            num *= &point.xi[i] - &point.xi[j];
        }
    }
    let mut den = BigRational::one();
    let pole = &one - &point.rho * (&one - &tau);
    for i in 0..k {
        let d = &point.xi[i] - &pole;
        if d.is_zero() {
            return Err(IdentityError::DegeneratePoint);
        }
        den *= d;
    }
    for a in 0..k {
        for b in 0..k {
            if a != b {
                let d = pair_denominator(&point.p, &point.q, &point.xi[a], &point.xi[b]);
                if d.is_zero() {
                    return Err(IdentityError::DegeneratePoint);
                }
                den *= d;
            }
        }
    }
    Ok(num / den)
}

/// Endpoint constants of the induction that proves the identity: for a
/// general pole location c the unique solution is b_k = q^{k−1} and
/// a_k = ((1−c)τ^k + c − τ)/(1−τ), consistent with b_1 = 1, a_1 = c.
/// Setting ρ = (1−c)/(1−τ) turns a_i into 1−ρ+ρτ^i.
pub fn induction_constants(
    k: u32,
    c: &BigRational,
    p: &BigRational,
    q: &BigRational,
) -> Result<(BigRational, BigRational), IdentityError> {
    let tau = p / q;
    if tau.is_one() {
        return Err(IdentityError::TauOne);
    }
    let one = BigRational::one();
    let b_k = rational_pow(q, k as i64 - 1);
    let a_k = ((&one - c) * rational_pow(&tau, k as i64) + c - &tau) / (&one - &tau);
    Ok((a_k, b_k))
}

/// Exact determinant by fraction-free Bareiss elimination: denominators are
/// cleared row by row, elimination runs over BigInt (every division exact),
/// and the row scalings are divided back out at the end. Avoids the
/// intermediate blowup of rational Gaussian elimination at k = 5.
fn det_bareiss(matrix: &[BigRational], n: usize) -> BigRational {
    debug_assert_eq!(matrix.len(), n * n);
    let mut scale = BigInt::one();
    let mut a: Vec<BigInt> = Vec::with_capacity(n * n);
    for row in 0..n {
        let mut lcm = BigInt::one();
        for col in 0..n {
            lcm = lcm.lcm(matrix[row * n + col].denom());
        }
        for col in 0..n {
            let e = &matrix[row * n + col];
            a.push(e.numer() * (&lcm / e.denom()));
        }
        scale *= lcm;
    }
    let mut sign = 1i8;
    let mut prev = BigInt::one();
    for k in 0..n.saturating_sub(1) {
        if a[k * n + k].is_zero() {
            let Some(swap_row) = (k + 1..n).find(|r| !a[r * n + k].is_zero()) else {
                return BigRational::zero();
            };
            for col in 0..n {
                a.swap(k * n + col, swap_row * n + col);
            }
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j]) / &prev;
                a[i * n + j] = v;
            }
            a[i * n + k] = BigInt::zero();
        }
        prev = a[k * n + k].clone();
    }
    let det_int = a[(n - 1) * n + (n - 1)].clone();
    let det = BigRational::new(det_int, scale);
    if sign < 0 {
        -det
    } else {
        det
    }
}

/// Checks the Cauchy-type determinant evaluation
/// det[1/(p+qξ_iξ_j−ξ_i)] = (−1)^k (pq)^{k(k−1)/2}
/// Π_{i≠j}(ξ_j−ξ_i)/(p+qξ_iξ_j−ξ_i) · Π_i 1/((1−ξ_i)(qξ_i−p)), exactly.
pub fn cauchy_determinant_identity(point: &RationalPoint) -> Result<bool, IdentityError> {
    let k = point.dimension();
    if k == 0 || k > 5 {
        return Err(IdentityError::BadDimension(k));
    }
    let one = BigRational::one();
    let mut matrix = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            let d = pair_denominator(&point.p, &point.q, &point.xi[i], &point.xi[j]);
            if d.is_zero() {
                return Err(IdentityError::DegeneratePoint);
            }
            matrix.push(one.clone() / d);
        }
    }
    let lhs = det_bareiss(&matrix, k);

    let mut rhs = rational_pow(&(&point.p * &point.q), (k * (k - 1) / 2) as i64);
    if k % 2 == 1 {
        rhs = -rhs;
    }
    for a in 0..k {
        for b in 0..k {
            if a != b {
                rhs *= (&point.xi[b] - &point.xi[a])
                    / pair_denominator(&point.p, &point.q, &point.xi[a], &point.xi[b]);
            }
        }
    }
    for i in 0..k {
        let d = (&one - &point.xi[i]) * (&point.q * &point.xi[i] - &point.p);
        if d.is_zero() {
            return Err(IdentityError::DegeneratePoint);
        }
        rhs /= d;
    }
    Ok(lhs == rhs)
}

/// Residual of the τ-binomial partial sum against its closed form:
/// |Σ_{k=m}^{K} [k−1 over k−m]_τ z^k − Π_{j=1}^{m} z/(1−τ^{m−j}z)|.
/// Decays geometrically in K for |z| < 1.
pub fn tau_binomial_sum_residual(
    m: u32,
    z: &BigRational,
    tau: &BigRational,
    k_max: u32,
) -> Result<BigRational, IdentityError> {
    if z.abs() >= BigRational::one() {
        return Err(IdentityError::DivergentArgument);
    }
    if tau.is_one() {
        return Err(IdentityError::TauOne);
    }
    let m = m as i64;
    let mut partial = BigRational::zero();
    let mut z_pow = rational_pow(z, m);
    for k in m..=k_max as i64 {
        let binom = tau_binomial_exact(k - 1, k - m, tau).expect("indices valid for k >= m >= 1");
        partial += binom * &z_pow;
        z_pow *= z;
    }
    let mut closed = BigRational::one();
    for j in 1..=m {
        let den = BigRational::one() - rational_pow(tau, m - j) * z;
        if den.is_zero() {
            return Err(IdentityError::DegeneratePoint);
        }
        closed *= z / den;
    }
    Ok((partial - closed).abs())
}

fn rational_in(
    rng: &mut impl Rng,
    num_range: std::ops::RangeInclusive<i64>,
    den_max: i64,
) -> BigRational {
    let num = rng.gen_range(num_range);
    let den = rng.gen_range(1..=den_max);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Admissibility: all denominators of both identity sides are nonzero.
/// The permutation tails touch every nonempty subset product, so the check
/// runs over subsets rather than permutations.
fn is_admissible(point: &RationalPoint) -> bool {
    let k = point.dimension();
    let one = BigRational::one();
    let tau = point.tau();
    if point.p.is_zero() || (&point.p - &point.q).is_zero() {
        return false;
    }
    for i in 0..k {
        for j in 0..k {
            if i != j {
                if point.xi[i] == point.xi[j] {
                    return false;
                }
                if pair_denominator(&point.p, &point.q, &point.xi[i], &point.xi[j]).is_zero() {
                    return false;
                }
            }
        }
        // Cauchy-side factors and the single-pole factor
        if point.xi[i].is_zero()
            || point.xi[i] == one
            || point.xi[i] == tau
            || pair_denominator(&point.p, &point.q, &point.xi[i], &point.xi[i]).is_zero()
            || (&point.xi[i] - (&one - &point.rho * (&one - &tau))).is_zero()
        {
            return false;
        }
    }
    for mask in 1u32..(1 << k) {
        let mut prod = BigRational::one();
        let mut size = 0i64;
        for (i, xi) in point.xi.iter().enumerate() {
            if mask >> i & 1 == 1 {
                prod *= xi;
                size += 1;
            }
        }
        if (prod - tail_constant(size, &point.rho, &tau)).is_zero() {
            return false;
        }
    }
    true
}

/// Draws an admissible random rational point with small numerators and
/// denominators (<= 50, bounding exact-arithmetic blowup). Returns the
/// point and the number of attempts used; admissible points are dense, so
/// ten tries virtually always suffice.
pub fn sample_admissible_point(
    k: usize,
    rng: &mut impl Rng,
) -> Result<(RationalPoint, usize), IdentityError> {
    const MAX_TRIES: usize = 10;
    for attempt in 1..=MAX_TRIES {
        let a = rng.gen_range(1..50i64);
        let b = rng.gen_range(a + 1..=50i64);
        let p = BigRational::new(BigInt::from(a), BigInt::from(b));
        let q = BigRational::one() - &p;
        let rho_num = rng.gen_range(1..=50i64);
        let rho_den = rng.gen_range(rho_num..=50i64);
        let rho = BigRational::new(BigInt::from(rho_num), BigInt::from(rho_den));
        let xi: Vec<BigRational> = (0..k)
            .map(|_| {
                let mut v = rational_in(rng, -50..=50, 50);
                if v.is_zero() {
                    v = BigRational::new(BigInt::from(2), BigInt::from(1));
                }
                v
            })
            .collect();
        let point = RationalPoint { xi, p, q, rho };
        if is_admissible(&point) {
            return Ok((point, attempt));
        }
    }
    Err(IdentityError::SamplingFailed(MAX_TRIES))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::big_rational;
    use rand::SeedableRng;

    fn br(n: i64, d: i64) -> BigRational {
        big_rational(n, d)
    }

    fn point_k2() -> RationalPoint {
        RationalPoint {
            xi: vec![br(1, 2), br(1, 3)],
            p: br(1, 4),
            q: br(3, 4),
            rho: br(2, 5),
        }
    }

    #[test]
    fn identity_k1_is_single_pole() {
        let point = RationalPoint {
            xi: vec![br(5, 3)],
            p: br(1, 4),
            q: br(3, 4),
            rho: br(2, 5),
        };
        let lhs = combinatorial_identity_sum(&point).unwrap();
        let rhs = combinatorial_identity_product(&point).unwrap();
        // k = 1: both sides are 1/(xi - 1 + rho(1 - tau))
        let one = BigRational::one();
        let tau = point.tau();
        let expected = one.clone() / (&point.xi[0] - &one + &point.rho * (&one - tau));
        assert_eq!(lhs, expected);
        assert_eq!(rhs, expected);
    }

    #[test]
    fn identity_k2_fixed_point() {
        let point = point_k2();
        let lhs = combinatorial_identity_sum(&point).unwrap();
        let rhs = combinatorial_identity_product(&point).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn identity_random_points_k_up_to_5() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        for k in 1..=5usize {
            for _ in 0..20 {
                let (point, tries) = sample_admissible_point(k, &mut rng).unwrap();
                assert!(tries <= 10);
                let lhs = combinatorial_identity_sum(&point).unwrap();
                let rhs = combinatorial_identity_product(&point).unwrap();
                assert_eq!(lhs, rhs, "k={k}");
            }
        }
    }

    #[test]
    fn identity_invariant_under_input_permutation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let (mut point, _) = sample_admissible_point(3, &mut rng).unwrap();
        for _ in 0..3 {
            point.xi.rotate_left(1);
            let lhs = combinatorial_identity_sum(&point).unwrap();
            let rhs = combinatorial_identity_product(&point).unwrap();
            assert_eq!(lhs, rhs);
            assert!(!rhs.is_zero());
        }
        point.xi.swap(0, 2);
        let lhs = combinatorial_identity_sum(&point).unwrap();
        let rhs = combinatorial_identity_product(&point).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn perturbed_tau_breaks_the_identity() {
        // negative control: evaluating the two sides with mismatched rates
        // must produce different values
        let point = point_k2();
        let mut skewed = point.clone();
        skewed.p = br(1, 3);
        skewed.q = BigRational::one() - &skewed.p;
        let lhs = combinatorial_identity_sum(&point).unwrap();
        let rhs = combinatorial_identity_product(&skewed).unwrap();
        assert_ne!(lhs, rhs);
    }

    #[test]
    fn induction_endpoint_constants() {
        let p = br(1, 4);
        let q = br(3, 4);
        let tau = &p / &q;
        let one = BigRational::one();
        // k = 1 reduces to b1 = 1, a1 = c
        let c = br(2, 7);
        let (a1, b1) = induction_constants(1, &c, &p, &q).unwrap();
        assert_eq!(b1, one);
        assert_eq!(a1, c);
        // c = 1 - rho(1 - tau) gives a_k = 1 - rho + rho tau^k
        let rho = br(2, 5);
        let c = &one - &rho * (&one - &tau);
        for k in 1..=6u32 {
            let (a_k, b_k) = induction_constants(k, &c, &p, &q).unwrap();
            let expected = &one - &rho + &rho * rational_pow(&tau, k as i64);
            assert_eq!(a_k, expected, "k={k}");
            assert_eq!(b_k, rational_pow(&q, k as i64 - 1));
        }
        // rho = 1 (c = tau) collapses to a_k = tau^k
        let (a_k, _) = induction_constants(4, &tau, &p, &q).unwrap();
        assert_eq!(a_k, rational_pow(&tau, 4));
        // tau = 1 rejected
        assert!(induction_constants(2, &c, &br(1, 2), &br(1, 2)).is_err());
    }

    #[test]
    fn cauchy_identity_k1_factorization() {
        // p + q xi^2 - xi = (q xi - p)(xi - 1) makes k = 1 immediate
        let point = RationalPoint {
            xi: vec![br(7, 3)],
            p: br(1, 4),
            q: br(3, 4),
            rho: br(1, 2),
        };
        assert!(cauchy_determinant_identity(&point).unwrap());
        let lhs =
            BigRational::one() / pair_denominator(&point.p, &point.q, &point.xi[0], &point.xi[0]);
        let expect = -(BigRational::one()
            / ((BigRational::one() - &point.xi[0]) * (&point.q * &point.xi[0] - &point.p)));
        assert_eq!(lhs, expect);
    }

    #[test]
    fn cauchy_identity_random_points() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for k in 1..=5usize {
            for _ in 0..20 {
                let (point, _) = sample_admissible_point(k, &mut rng).unwrap();
                assert!(cauchy_determinant_identity(&point).unwrap(), "k={k}");
            }
        }
    }

    #[test]
    fn bareiss_matches_direct_two_by_two() {
        let m = vec![br(1, 2), br(2, 3), br(-1, 5), br(4, 7)];
        let det = det_bareiss(&m, 2);
        let direct = &m[0] * &m[3] - &m[1] * &m[2];
        assert_eq!(det, direct);
        // singular matrix
        let s = vec![br(1, 2), br(1, 2), br(1, 2), br(1, 2)];
        assert!(det_bareiss(&s, 2).is_zero());
    }

    #[test]
    fn tau_binomial_sum_geometric_case() {
        // m = 1: the sum is z + z^2 + ... = z/(1-z)
        let tau = br(1, 2);
        let z = br(1, 3);
        let mut prev = None;
        for k_max in [5u32, 10, 20] {
            let r = tau_binomial_sum_residual(1, &z, &tau, k_max).unwrap();
            if let Some(p) = prev {
                // each extra block of 5 terms shrinks the residual by ~3^-5
                assert!(&r * br(100, 1) < p, "residual not decaying");
            }
            prev = Some(r);
        }
    }

    #[test]
    fn tau_binomial_sum_tail_bound() {
        let tau = br(1, 2);
        let z = br(1, 4);
        let r = tau_binomial_sum_residual(2, &z, &tau, 40).unwrap();
        assert!(r < rational_pow(&br(1, 4), 38));
        // z = 0 gives exactly 0 for m >= 1
        let r0 = tau_binomial_sum_residual(3, &BigRational::zero(), &tau, 10).unwrap();
        assert!(r0.is_zero());
        // divergent argument rejected
        assert!(tau_binomial_sum_residual(1, &br(3, 2), &tau, 10).is_err());
    }

    #[test]
    fn sampling_always_terminates_quickly() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5150);
        for _ in 0..200 {
            let (point, tries) = sample_admissible_point(4, &mut rng).unwrap();
            assert!(tries <= 10);
            assert_eq!(point.dimension(), 4);
        }
    }
}
