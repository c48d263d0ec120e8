use super::LaurentPoly;
use num_bigint::BigInt;

/// Balanced quantum integer `[n] = (v^n - v^-n)/(v - v^-1)`.
///
/// `[n] = v^{-(n-1)} + v^{-(n-3)} + ... + v^{n-1}` for `n > 0`, `[0] = 0`,
/// and `[-n] = -[n]`.
pub fn quantum_integer(n: i64) -> LaurentPoly {
    if n == 0 {
        return LaurentPoly::zero();
    }
    let m = n.unsigned_abs() as i64;
    let mut p = LaurentPoly::zero();
    let mut e = -(m - 1);
    while e <= m - 1 {
        p.add_term(e, BigInt::from(if n > 0 { 1 } else { -1 }));
        e += 2;
    }
    p
}

/// `[n]! = [n][n-1]...[1]`, with `[0]! = 1`.
pub fn quantum_factorial(n: u32) -> LaurentPoly {
    let mut p = LaurentPoly::one();
    for k in 1..=n {
        p = &p * &quantum_integer(k as i64);
    }
    p
}

/// Balanced Gaussian binomial `[m choose k] = [m]! / ([k]! [m-k]!)`.
///
/// Computed by the stepwise ratio `prod_{i=1..k} [m-k+i]/[i]`, each step an
/// exact Laurent division. Returns 0 when `k > m`.
pub fn gauss_binomial(m: u32, k: u32) -> LaurentPoly {
    if k > m {
        return LaurentPoly::zero();
    }
    let k = k.min(m - k);
    let mut p = LaurentPoly::one();
    for i in 1..=k {
        p = &p * &quantum_integer((m - k + i) as i64);
        p = p
            .exact_div(&quantum_integer(i as i64))
            .expect("binomial ratio stays polynomial");
    }
    p
}

/// The alternating sum `sum_{k=0}^{m} (-1)^k v^{k d} [m choose k]`.
///
/// Factors as `prod_{j=1}^{m} (1 - v^{d-m-1+2j})`, so it vanishes exactly when
/// `|d| <= m-1` and `d ≡ m-1 (mod 2)`. This is the shape of the left side of
/// the higher-order Serre relations after pairing against a dual basis.
pub fn vanishing_sum(m: u32, d: i64) -> LaurentPoly {
    let mut s = LaurentPoly::zero();
    for k in 0..=m {
        let term = gauss_binomial(m, k).shifted(k as i64 * d);
        s = if k % 2 == 0 { &s + &term } else { &s - &term };
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn lp(terms: &[(i64, i64)]) -> LaurentPoly {
        LaurentPoly::from_terms(terms)
    }

    #[test]
    fn quantum_integers_small() {
        assert_eq!(quantum_integer(0), LaurentPoly::zero());
        assert_eq!(quantum_integer(1), LaurentPoly::one());
        assert_eq!(quantum_integer(2), lp(&[(-1, 1), (1, 1)]));
        assert_eq!(quantum_integer(3), lp(&[(-2, 1), (0, 1), (2, 1)]));
        assert_eq!(quantum_integer(3).to_string(), "v^-2 + 1 + v^2");
        assert_eq!(quantum_integer(-2), lp(&[(-1, -1), (1, -1)]));
    }

    #[test]
    fn factorials_small() {
        assert_eq!(quantum_factorial(0), LaurentPoly::one());
        assert_eq!(quantum_factorial(2), quantum_integer(2));
        assert_eq!(
            quantum_factorial(3),
            lp(&[(-3, 1), (-1, 2), (1, 2), (3, 1)])
        );
    }

    #[test]
    fn gauss_binomial_values() {
        assert_eq!(gauss_binomial(4, 2), lp(&[(-4, 1), (-2, 1), (0, 2), (2, 1), (4, 1)]));
        assert_eq!(gauss_binomial(5, 0), LaurentPoly::one());
        assert_eq!(gauss_binomial(5, 5), LaurentPoly::one());
        assert_eq!(gauss_binomial(2, 3), LaurentPoly::zero());
        for m in 0..=8u32 {
            for k in 0..=m {
                let b = gauss_binomial(m, k);
                assert_eq!(b, gauss_binomial(m, m - k), "symmetry at ({m},{k})");
                assert_eq!(b.bar(), b, "bar-invariance at ({m},{k})");
                // ratio definition against full factorials
                let denom = &quantum_factorial(k) * &quantum_factorial(m - k);
                assert_eq!(&b * &denom, quantum_factorial(m));
            }
        }
    }

    /// Count k-dimensional subspaces of F_q^m by enumerating reduced echelon
    /// pivot patterns: a pattern with pivot columns p_1 < ... < p_k fixes the
    /// pivot entries and leaves one free entry per (row i, non-pivot column
    /// right of p_i), each ranging over F_q.
    fn subspace_count_oracle(q: u64, m: u32, k: u32) -> u128 {
        let mut total: u128 = 0;
        for mask in 0u32..(1 << m) {
            if mask.count_ones() != k {
                continue;
            }
            let pivots: Vec<u32> = (0..m).filter(|j| mask & (1 << j) != 0).collect();
            let mut free = 0u32;
            for &p in &pivots {
                for col in (p + 1)..m {
                    if mask & (1 << col) == 0 {
                        free += 1;
                    }
                }
            }
            total += (q as u128).pow(free);
        }
        total
    }

    #[test]
    fn gauss_binomial_counts_subspaces() {
        for &q in &[2u32, 3, 5] {
            for m in 0..=6u32 {
                for k in 0..=m {
                    // v^{k(m-k)} [m choose k] is a polynomial in v^2 = q.
                    let poly = gauss_binomial(m, k).shifted((k * (m - k)) as i64);
                    let val = poly.eval_sqrt(q).expect_rational();
                    let expected = subspace_count_oracle(q as u64, m, k);
                    assert_eq!(
                        val,
                        num_rational::BigRational::from_integer(BigInt::from(expected)),
                        "q={q} m={m} k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn alternating_sums_vanish_in_window() {
        for m in 1..=6u32 {
            for d in -((m as i64) + 2)..=((m as i64) + 2) {
                let s = vanishing_sum(m, d);
                let in_window = d.abs() <= m as i64 - 1 && (d - (m as i64 - 1)) % 2 == 0;
                assert_eq!(s.is_zero(), in_window, "m={m} d={d} gave {s}");
            }
        }
        // spot-check a nonzero value
        let s = vanishing_sum(2, 0);
        assert_eq!(s, lp(&[(-1, -1), (0, 2), (1, -1)]));
        assert!(!vanishing_sum(3, 4).is_zero());
    }
}
