use super::{LaurentPoly, QuadScalar, RationalFn};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// One evaluation of an unknown Laurent polynomial at `v = sqrt(prime)`.
#[derive(Clone, Debug)]
pub struct Sample {
    pub prime: u32,
    pub value: QuadScalar,
}

impl Sample {
    pub fn new(prime: u32, value: QuadScalar) -> Self {
        assert_eq!(value.q, prime, "sample value lives in the wrong field");
        Sample { prime, value }
    }

    pub fn from_rational(prime: u32, value: BigRational) -> Self {
        Sample { prime, value: QuadScalar::from_rational(prime, value) }
    }
}

/// Recover the integer Laurent polynomial supported on `[-bound, bound]` from
/// its values at `v = sqrt(prime)`, one per distinct prime.
pub fn interpolate_laurent(samples: &[Sample], bound: i64) -> Result<LaurentPoly> {
    interpolate_laurent_window(samples, -bound, bound)
}

/// Recover the integer Laurent polynomial supported on `[lo, hi]`.
///
/// Splitting by exponent parity turns the constraints into two generalized
/// Vandermonde systems over Q (even exponents hit the rational part of each
/// value, odd exponents the `sqrt(prime)` part), which have full column rank
/// for distinct primes, so any consistent solution is unique. Errors:
/// [`Error::InsufficientSamples`] when a parity class has more unknowns than
/// samples, [`Error::InconsistentSamples`] when no polynomial on the window
/// fits, and [`Error::NonIntegerInterpolant`] when the unique rational
/// solution is not integral.
pub fn interpolate_laurent_window(samples: &[Sample], lo: i64, hi: i64) -> Result<LaurentPoly> {
    let coeffs = solve_window(samples, lo, hi)?;
    let mut p = LaurentPoly::zero();
    for (e, c) in coeffs {
        if c.is_zero() {
            continue;
        }
        if !c.is_integer() {
            return Err(Error::NonIntegerInterpolant);
        }
        p.add_term(e, c.to_integer());
    }
    Ok(p)
}

/// Like [`interpolate_laurent_window`], but allows rational coefficients.
/// The result is returned as a Laurent polynomial over a single integer
/// denominator.
pub fn interpolate_rational_window(samples: &[Sample], lo: i64, hi: i64) -> Result<RationalFn> {
    let coeffs = solve_window(samples, lo, hi)?;
    let mut den = BigInt::one();
    for (_, c) in &coeffs {
        den = den.lcm(c.denom());
    }
    let mut num = LaurentPoly::zero();
    for (e, c) in coeffs {
        let scaled = c * BigRational::from_integer(den.clone());
        debug_assert!(scaled.is_integer());
        num.add_term(e, scaled.to_integer());
    }
    Ok(RationalFn::new(num, LaurentPoly::monomial(0, den)))
}

/// Recover the integer Laurent polynomial supported on an explicit exponent
/// set. Sparse supports keep the sample requirement at the number of
/// exponents per parity class rather than the width of the full window.
pub fn interpolate_laurent_support(samples: &[Sample], exps: &[i64]) -> Result<LaurentPoly> {
    let coeffs = solve_support(samples, exps)?;
    let mut p = LaurentPoly::zero();
    for (e, c) in coeffs {
        if c.is_zero() {
            continue;
        }
        if !c.is_integer() {
            return Err(Error::NonIntegerInterpolant);
        }
        p.add_term(e, c.to_integer());
    }
    Ok(p)
}

fn solve_window(samples: &[Sample], lo: i64, hi: i64) -> Result<Vec<(i64, BigRational)>> {
    if lo > hi {
        return Err(Error::BadInput(format!("empty exponent window [{lo}, {hi}]")));
    }
    let exps: Vec<i64> = (lo..=hi).collect();
    solve_support(samples, &exps)
}

fn solve_support(samples: &[Sample], support: &[i64]) -> Result<Vec<(i64, BigRational)>> {
    if support.is_empty() {
        return Err(Error::BadInput("empty exponent support".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    for s in samples {
        if !seen.insert(s.prime) {
            return Err(Error::BadInput(format!("duplicate sample prime {}", s.prime)));
        }
    }
    let mut dedup: Vec<i64> = support.to_vec();
    dedup.sort_unstable();
    dedup.dedup();
    let even: Vec<i64> = dedup.iter().copied().filter(|e| e.rem_euclid(2) == 0).collect();
    let odd: Vec<i64> = dedup.iter().copied().filter(|e| e.rem_euclid(2) == 1).collect();
    let needed = even.len().max(odd.len());
    if samples.len() < needed {
        return Err(Error::InsufficientSamples { needed, got: samples.len() });
    }

    let mut out = Vec::new();
    for (exps, pick_part) in [(&even, false), (&odd, true)] {
        if exps.is_empty() {
            // Nothing on this parity: the data must agree, i.e. that part of
            // every sample must vanish.
            for s in samples {
                let part = if pick_part { &s.value.b } else { &s.value.a };
                if !part.is_zero() {
                    return Err(Error::InconsistentSamples);
                }
            }
            continue;
        }
        let rows: Vec<Vec<BigRational>> = samples
            .iter()
            .map(|s| {
                let mut row: Vec<BigRational> = exps
                    .iter()
                    .map(|&e| {
                        // v^e at sqrt(q): q^{e/2} on evens, q^{(e-1)/2} * sqrt(q) on odds
                        let k = if pick_part { (e - 1) / 2 } else { e / 2 };
                        int_pow(s.prime, k)
                    })
                    .collect();
                row.push(if pick_part { s.value.b.clone() } else { s.value.a.clone() });
                row
            })
            .collect();
        let solved = solve_exact(rows, exps.len())?;
        out.extend(exps.iter().copied().zip(solved));
    }
    out.sort_by_key(|&(e, _)| e);
    Ok(out)
}

/// Reconstruct a rational function `N(v)/D(v)` from its values at `v = sqrt(p)`.
///
/// `num_exps` and `den_exps` are the candidate exponent supports of the
/// numerator and denominator. Cross-multiplying each sample into
/// `N(v_k) - value_k * D(v_k) = 0` gives a homogeneous linear system over Q
/// (two equations per prime: the rational and the `sqrt` part). The fit is
/// accepted only when the solution space is one-dimensional — a unique
/// function up to scale — and the denominator is nonzero at every sample
/// point. Callers should start from tight supports and widen: an over-generous
/// window admits unreduced `N*g / D*g` solutions and fails with
/// [`Error::InsufficientSamples`].
pub fn interpolate_quotient(
    samples: &[Sample],
    num_exps: &[i64],
    den_exps: &[i64],
) -> Result<RationalFn> {
    if den_exps.is_empty() || num_exps.is_empty() {
        return Err(Error::BadInput("empty exponent support".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    for s in samples {
        if !seen.insert(s.prime) {
            return Err(Error::BadInput(format!("duplicate sample prime {}", s.prime)));
        }
    }
    let ncols = num_exps.len() + den_exps.len();
    let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(2 * samples.len());
    for s in samples {
        // value = a + b*sqrt(p); v^e = p^{e/2} (even) or p^{(e-1)/2} sqrt(p) (odd)
        let (a, b) = (&s.value.a, &s.value.b);
        let mut rational = Vec::with_capacity(ncols);
        let mut surd = Vec::with_capacity(ncols);
        for &e in num_exps {
            if e.rem_euclid(2) == 0 {
                rational.push(int_pow(s.prime, e / 2));
                surd.push(BigRational::zero());
            } else {
                rational.push(BigRational::zero());
                surd.push(int_pow(s.prime, (e - 1) / 2));
            }
        }
        for &e in den_exps {
            if e.rem_euclid(2) == 0 {
                let w = int_pow(s.prime, e / 2);
                rational.push(-(a * &w));
                surd.push(-(b * &w));
            } else {
                let w = int_pow(s.prime, (e - 1) / 2);
                rational.push(-(b * &w) * int_pow(s.prime, 1));
                surd.push(-(a * &w));
            }
        }
        rows.push(rational);
        rows.push(surd);
    }
    let kernel = kernel_exact(rows, ncols);
    match kernel.len() {
        0 => return Err(Error::InconsistentSamples),
        1 => {}
        _ => {
            return Err(Error::InsufficientSamples {
                needed: ncols,
                got: 2 * samples.len(),
            })
        }
    }
    let sol = &kernel[0];
    let mut lcm = BigInt::one();
    for c in sol {
        lcm = lcm.lcm(c.denom());
    }
    let mut num = LaurentPoly::zero();
    let mut den = LaurentPoly::zero();
    for (k, c) in sol.iter().enumerate() {
        let z = (c * BigRational::from_integer(lcm.clone())).to_integer();
        if k < num_exps.len() {
            num.add_term(num_exps[k], z);
        } else {
            den.add_term(den_exps[k - num_exps.len()], z);
        }
    }
    let f = RationalFn::checked_new(num, den).ok_or(Error::InconsistentSamples)?;
    // The kernel vector satisfies the cross-multiplied equations; reject
    // solutions whose denominator vanishes at a sample point (0 = 0 rows).
    for s in samples {
        match f.eval_sqrt(s.prime) {
            Some(v) if v == s.value => {}
            _ => return Err(Error::InconsistentSamples),
        }
    }
    Ok(f)
}

/// Basis of the null space of a homogeneous system, via exact row reduction.
fn kernel_exact(mut rows: Vec<Vec<BigRational>>, ncols: usize) -> Vec<Vec<BigRational>> {
    let nrows = rows.len();
    let mut pivot_row_of_col = vec![usize::MAX; ncols];
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..nrows).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].clone();
        for x in rows[r][c..].iter_mut() {
            *x = &*x / &inv;
        }
        for i in 0..nrows {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in c..ncols {
                    let sub = &f * &rows[r][j];
                    rows[i][j] = &rows[i][j] - &sub;
                }
            }
        }
        pivot_row_of_col[c] = r;
        r += 1;
    }
    let mut basis = Vec::new();
    for free in 0..ncols {
        if pivot_row_of_col[free] != usize::MAX {
            continue;
        }
        let mut vec = vec![BigRational::zero(); ncols];
        vec[free] = BigRational::one();
        for c in 0..ncols {
            let pr = pivot_row_of_col[c];
            if pr != usize::MAX {
                vec[c] = -rows[pr][free].clone();
            }
        }
        basis.push(vec);
    }
    basis
}

fn int_pow(base: u32, exp: i64) -> BigRational {
    let b = BigInt::from(base);
    if exp >= 0 {
        BigRational::from_integer(b.pow(exp as u32))
    } else {
        BigRational::new(BigInt::one(), b.pow((-exp) as u32))
    }
}

/// Exact Gaussian elimination on an augmented matrix with `ncols` unknowns.
/// The system must determine every unknown; extra rows are consistency checks.
fn solve_exact(mut rows: Vec<Vec<BigRational>>, ncols: usize) -> Result<Vec<BigRational>> {
    let nrows = rows.len();
    let mut pivot_row_of_col = vec![usize::MAX; ncols];
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..nrows).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].clone();
        for x in rows[r][c..].iter_mut() {
            *x = &*x / &inv;
        }
        for i in 0..nrows {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in c..=ncols {
                    let sub = &f * &rows[r][j];
                    rows[i][j] = &rows[i][j] - &sub;
                }
            }
        }
        pivot_row_of_col[c] = r;
        r += 1;
    }
    // Any leftover row with a nonzero right-hand side is a contradiction.
    for row in rows.iter().skip(r) {
        if !row[ncols].is_zero() {
            return Err(Error::InconsistentSamples);
        }
    }
    if pivot_row_of_col.iter().any(|&p| p == usize::MAX) {
        // Rank-deficient coefficient matrix: the window is too generous for
        // the available samples to pin down.
        return Err(Error::InsufficientSamples { needed: ncols, got: r });
    }
    Ok(pivot_row_of_col
        .iter()
        .map(|&p| rows[p][ncols].clone())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn rational_samples(vals: &[(u32, i64)]) -> Vec<Sample> {
        vals.iter().map(|&(q, v)| Sample::from_rational(q, rat(v))).collect()
    }

    #[test]
    fn recovers_one_plus_v_squared() {
        let samples = rational_samples(&[(2, 3), (3, 4), (5, 6)]);
        let p = interpolate_laurent(&samples, 2).unwrap();
        assert_eq!(p, LaurentPoly::from_terms(&[(0, 1), (2, 1)]));
        assert_eq!(p.to_string(), "1 + v^2");
    }

    #[test]
    fn round_trips_polynomials_with_odd_terms() {
        // A symmetric window [-4, 4] has five even-exponent unknowns, so five
        // sample primes are required.
        let primes = [2u32, 3, 5, 7, 11];
        for target in [
            LaurentPoly::from_terms(&[(-3, 2), (-1, -1), (0, 5), (2, 1), (3, 4)]),
            LaurentPoly::from_terms(&[(-4, 1), (4, 1)]),
            LaurentPoly::zero(),
        ] {
            let samples: Vec<Sample> = primes
                .iter()
                .map(|&q| Sample::new(q, target.eval_sqrt(q)))
                .collect();
            let got = interpolate_laurent(&samples, 4).unwrap_or_else(|e| {
                panic!("failed on {target}: {e}");
            });
            assert_eq!(got, target);
        }
    }

    #[test]
    fn asymmetric_windows() {
        let target = LaurentPoly::from_terms(&[(0, 1), (1, 3), (2, 1), (5, 2)]);
        let samples: Vec<Sample> = [2u32, 3, 5, 7]
            .iter()
            .map(|&q| Sample::new(q, target.eval_sqrt(q)))
            .collect();
        assert_eq!(interpolate_laurent_window(&samples, 0, 6).unwrap(), target);
    }

    #[test]
    fn sparse_supports() {
        // A widely spread support that a dense window could not resolve from
        // four primes.
        let target = LaurentPoly::from_terms(&[(-54, 2), (-36, -1), (-18, 3), (0, 1)]);
        let primes = [2u32, 3, 5, 7];
        let samples: Vec<Sample> =
            primes.iter().map(|&q| Sample::new(q, target.eval_sqrt(q))).collect();
        let support = [-54i64, -36, -18, 0];
        assert_eq!(interpolate_laurent_support(&samples, &support).unwrap(), target);
        // a support missing a used exponent is inconsistent
        assert!(matches!(
            interpolate_laurent_support(&samples, &[-36, -18, 0]),
            Err(Error::InconsistentSamples)
        ));
        // mixed parity splits the equations, so two exponents per parity
        // resolve from two primes
        let mixed = LaurentPoly::from_terms(&[(-3, 1), (-1, 2), (0, 4), (2, -1)]);
        let samples: Vec<Sample> =
            [2u32, 3].iter().map(|&q| Sample::new(q, mixed.eval_sqrt(q))).collect();
        assert_eq!(
            interpolate_laurent_support(&samples, &[-3, -1, 0, 2]).unwrap(),
            mixed
        );
    }

    #[test]
    fn error_modes() {
        // too few samples for the window
        let samples = rational_samples(&[(2, 3), (3, 4)]);
        match interpolate_laurent(&samples, 2) {
            Err(Error::InsufficientSamples { needed: 3, got: 2 }) => {}
            other => panic!("expected InsufficientSamples, got {other:?}"),
        }
        // values that no window-0 polynomial matches
        let samples = rational_samples(&[(2, 1), (3, 2)]);
        match interpolate_laurent(&samples, 0) {
            Err(Error::InconsistentSamples) => {}
            other => panic!("expected InconsistentSamples, got {other:?}"),
        }
        // a consistent rational, non-integer interpolant
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let samples: Vec<Sample> = [2u32, 3]
            .iter()
            .map(|&q| Sample::from_rational(q, half.clone()))
            .collect();
        match interpolate_laurent(&samples, 0) {
            Err(Error::NonIntegerInterpolant) => {}
            other => panic!("expected NonIntegerInterpolant, got {other:?}"),
        }
        let r = interpolate_rational_window(&samples, 0, 0).unwrap();
        assert_eq!(r.as_constant(), Some(half));
        // duplicate primes are rejected up front
        let samples = rational_samples(&[(3, 1), (3, 1)]);
        assert!(matches!(interpolate_laurent(&samples, 0), Err(Error::BadInput(_))));
    }

    #[test]
    fn quotient_recovery() {
        // v^4 / (v^2 - 1), sampled at four primes
        let target = RationalFn::new(
            LaurentPoly::v_pow(4),
            LaurentPoly::from_terms(&[(0, -1), (2, 1)]),
        );
        let samples: Vec<Sample> = [2u32, 3, 5, 7]
            .iter()
            .map(|&q| Sample::new(q, target.eval_sqrt(q).unwrap()))
            .collect();
        let got = interpolate_quotient(&samples, &[4], &[0, 2]).unwrap();
        assert_eq!(got, target);

        // a GL_2-order style denominator: v^8 / (v^8 - v^6 - v^4 + v^2)
        let target = RationalFn::new(
            LaurentPoly::v_pow(8),
            LaurentPoly::from_terms(&[(2, 1), (4, -1), (6, -1), (8, 1)]),
        );
        let samples: Vec<Sample> = [2u32, 3, 5, 7]
            .iter()
            .map(|&q| Sample::new(q, target.eval_sqrt(q).unwrap()))
            .collect();
        let got = interpolate_quotient(&samples, &[8], &[2, 4, 6, 8]).unwrap();
        assert_eq!(got, target);

        // odd numerator support
        let target = RationalFn::new(
            LaurentPoly::v_pow(1),
            LaurentPoly::from_terms(&[(0, -1), (2, 1)]),
        );
        let samples: Vec<Sample> = [2u32, 3, 5]
            .iter()
            .map(|&q| Sample::new(q, target.eval_sqrt(q).unwrap()))
            .collect();
        let got = interpolate_quotient(&samples, &[1], &[0, 2]).unwrap();
        assert_eq!(got, target);
    }

    #[test]
    fn quotient_rejects_bad_windows() {
        let target = RationalFn::new(
            LaurentPoly::v_pow(4),
            LaurentPoly::from_terms(&[(0, -1), (2, 1)]),
        );
        let samples: Vec<Sample> = [2u32, 3, 5, 7]
            .iter()
            .map(|&q| Sample::new(q, target.eval_sqrt(q).unwrap()))
            .collect();
        // too generous: every common-factor blowup also fits
        assert!(matches!(
            interpolate_quotient(&samples, &[2, 4, 6], &[0, 2, 4]),
            Err(Error::InsufficientSamples { .. })
        ));
        // too narrow: nothing fits
        assert!(matches!(
            interpolate_quotient(&samples, &[0], &[0]),
            Err(Error::InconsistentSamples)
        ));
    }

    #[test]
    fn odd_only_data_needs_odd_exponents() {
        // value sqrt(q) at each prime: the polynomial is v itself
        let samples: Vec<Sample> = [2u32, 3, 5]
            .iter()
            .map(|&q| Sample::new(q, QuadScalar::v_pow(q, 1)))
            .collect();
        assert_eq!(
            interpolate_laurent_window(&samples, -1, 1).unwrap(),
            LaurentPoly::v_pow(1)
        );
        // an even-only window cannot carry the sqrt part
        assert!(matches!(
            interpolate_laurent_window(&samples, 0, 0),
            Err(Error::InconsistentSamples)
        ));
    }
}
