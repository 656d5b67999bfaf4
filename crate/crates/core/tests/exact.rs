//! Rational-arithmetic checks of the rank operator for small `q`.

use cmtwist::isospace::character_count;
use cmtwist::{FieldParams, Flavor, LocalPlane};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

fn int(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn one() -> BigRational {
    int(1)
}

fn q_pow(field: &FieldParams, r: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(field.q()).pow(r as u32))
}

/// `m(r, s)` with `q^{-ε} = 1/p`.
fn entry(field: &FieldParams, r: usize, s: usize) -> BigRational {
    let p = int(field.p() as u64);
    let qr = q_pow(field, r);
    if s + 1 == r {
        one() - one() / qr
    } else if s == r {
        (one() - one() / p) / qr
    } else if s == r + 1 {
        one() / (p * qr)
    } else {
        int(0)
    }
}

/// `D(r) / D(0)`.
fn weight(field: &FieldParams, r: usize) -> BigRational {
    let lift = int(field.q() / field.p() as u64);
    (1..=r).fold(one(), |acc, i| {
        acc * lift.clone() / (q_pow(field, i) - one())
    })
}

fn small_fields() -> Vec<FieldParams> {
    [2u64, 3, 5, 7]
        .iter()
        .flat_map(|&p| {
            [
                FieldParams::symplectic(p).unwrap(),
                FieldParams::unitary(p).unwrap(),
            ]
        })
        .filter(|f| f.q() <= 9)
        .collect()
}

#[test]
fn rows_sum_to_one_exactly() {
    for f in small_fields() {
        for r in 0..=30usize {
            let lo = r.saturating_sub(1);
            let row = (lo..=r + 1).fold(int(0), |acc, s| acc + entry(&f, r, s));
            assert_eq!(row, one(), "{f:?} r={r}");
        }
    }
}

#[test]
fn float_entries_match_rationals() {
    for f in small_fields() {
        for r in 0..=10usize {
            for s in r.saturating_sub(1)..=r + 1 {
                let exact = entry(&f, r, s).to_f64().unwrap();
                let float = cmtwist::rankdist::markov_entry(&f, r, s);
                assert!(
                    (exact - float).abs() <= 4e-16 * exact.max(1e-300),
                    "{f:?} {r} {s}"
                );
            }
        }
    }
}

#[test]
fn stationary_balance_is_exact() {
    // (D·M)(s) only involves ranks s-1, s, s+1, so invariance is a finite
    // identity in the unnormalized weights.
    for f in small_fields() {
        for s in 0..=20usize {
            let mut lhs = weight(&f, s) * entry(&f, s, s) + weight(&f, s + 1) * entry(&f, s + 1, s);
            if s > 0 {
                lhs += weight(&f, s - 1) * entry(&f, s - 1, s);
            }
            assert_eq!(lhs, weight(&f, s), "{f:?} s={s}");
        }
    }
}

#[test]
fn micro_model_law_is_exact() {
    for p in [2u64, 3, 5] {
        for flavor in [Flavor::Symplectic, Flavor::Unitary] {
            let f = FieldParams::new(p, flavor).unwrap();
            let plane = LocalPlane::build(f);
            for n in [1u32, 2] {
                let chars = character_count(p, n).unwrap();
                let mut up = 0u64;
                for v in plane.ramified_lines() {
                    for fiber in 0..chars {
                        let k = plane.kummer_line_of_character(fiber, n).unwrap();
                        up += v.intersection(&f, k).unwrap().dim() as u64;
                    }
                }
                let total = plane.ramified_lines().len() as u64 * chars;
                for r in 0..=3usize {
                    let c0 = one() / q_pow(&f, r);
                    let down = if r == 0 { int(0) } else { one() - c0.clone() };
                    let stay = c0.clone() * int(total - up) / int(total);
                    let rise = c0 * int(up) / int(total);
                    if r > 0 {
                        assert_eq!(down, entry(&f, r, r - 1));
                    }
                    assert_eq!(stay, entry(&f, r, r), "{f:?} n={n} r={r}");
                    assert_eq!(rise, entry(&f, r, r + 1), "{f:?} n={n} r={r}");
                }
            }
        }
    }
}
