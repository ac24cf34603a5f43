use rand::Rng;
use rka_core::complexity::*;
use rka_core::{Rational, StreamKey};

fn ri(x: i128) -> Rational {
    Rational::from_integer(x)
}

#[test]
fn balance_identity() {
    let mut rng = StreamKey::new(1).rng();
    for _ in 0..50 {
        let m: u64 = rng.random_range(1..=512);
        let k: u64 = rng.random_range(1..=m);
        let tau = 190;
        for (target, canon) in [
            (Target::Rzf, cost_rzf::<Rational>(m, k, tau).unwrap()),
            (Target::Zf, cost_zf::<Rational>(m, k, tau).unwrap()),
        ] {
            let t: Rational = t_upper(m, k, target).unwrap();
            let rka_mults =
                ri(m as i128) * t + ri(2 * (m * k) as i128) + ri((tau * m * k + m * k * k) as i128);
            assert_eq!(rka_mults, canon.total, "M={m} K={k} {target:?}");
            if t.is_integer() && t >= ri(0) {
                let rka = cost_rka::<Rational>(m, k, t.to_integer() as u64, tau).unwrap();
                assert_eq!(rka.total, canon.total);
            }
        }
    }
}

#[test]
fn row_differences() {
    let mut rng = StreamKey::new(2).rng();
    for _ in 0..50 {
        let m: u64 = rng.random_range(1..=400);
        let k: u64 = rng.random_range(1..=m);
        let zf = cost_zf::<Rational>(m, k, 7).unwrap();
        let rzf = cost_rzf::<Rational>(m, k, 7).unwrap();
        assert_eq!(
            rzf.combining_mults - zf.combining_mults,
            ri((k * m) as i128)
        );
        assert_eq!(rzf.combining_divs, ri(k as i128));
        let a: Rational = t_upper(m, k, Target::Rzf).unwrap();
        let b: Rational = t_upper(m, k, Target::Zf).unwrap();
        assert_eq!(a - b, ri(k as i128));
        let rka = cost_rka::<Rational>(m, k, 3, 7).unwrap();
        assert_eq!(
            rka.reception_mults - zf.reception_mults,
            ri((m * k * k) as i128)
        );
    }
}

#[test]
fn counts_are_integers() {
    for k in 1..=1000u64 {
        let c = cost_rzf::<Rational>(k, k, 1).unwrap();
        assert!(c.combining_mults.is_integer(), "K={k}");
    }
}

#[test]
fn leading_term_scaling() {
    for m in [64u64, 128, 256] {
        let k = m / 4;
        let a = cost_zf::<f64>(m, k, 1).unwrap().combining_mults;
        let b = cost_zf::<f64>(2 * m, 2 * k, 1).unwrap().combining_mults;
        assert!((b / a - 8.0).abs() <= 0.4, "{}", b / a);
    }
}

#[test]
fn bound_increases_with_antennas_at_fixed_loading() {
    let l = Rational::new(1, 10);
    let mut last = t_upper_generic(ri(8), l * ri(8), Target::Rzf);
    for m in 9..600 {
        let now = t_upper_generic(ri(m), l * ri(m), Target::Rzf);
        assert!(now > last);
        last = now;
    }
}

#[test]
fn threshold_for_tiny_target() {
    let l = Rational::new(1, 10);
    let m = tradeoff_threshold(l, ri(1), Target::Rzf, KRounding::Exact, 1000).unwrap();
    assert!(t_upper_generic(ri(m as i128), l * ri(m as i128), Target::Rzf) >= ri(1));
    assert!(t_upper_generic(ri(m as i128 - 1), l * ri(m as i128 - 1), Target::Rzf) < ri(1));
}
