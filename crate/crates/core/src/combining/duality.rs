use crate::error::{Error, Result};
use crate::scalar::{CMatrix, CVector, Real};

use super::Combiner;

/// `s_hat = V^H y`.
pub fn recover_signals<T: Real>(combiner: &Combiner<T>, y: &CVector<T>) -> Result<CVector<T>> {
    if y.len() != combiner.m() {
        return Err(Error::DimensionMismatch(format!(
            "received vector has {} entries, combiner has {} antennas",
            y.len(),
            combiner.m()
        )));
    }
    Ok(combiner.v.ad_mul(y))
}

/// `S_hat = V^H Y` for a block of received vectors stored as columns.
pub fn recover_block<T: Real>(combiner: &Combiner<T>, y: &CMatrix<T>) -> Result<CMatrix<T>> {
    if y.nrows() != combiner.m() {
        return Err(Error::DimensionMismatch(format!(
            "received block has {} rows, combiner has {} antennas",
            y.nrows(),
            combiner.m()
        )));
    }
    Ok(combiner.v.ad_mul(y))
}

/// Downlink precoder `w_k = v_k / ||v_k||`.
pub fn precoder_from_combiner<T: Real>(combiner: &Combiner<T>) -> Result<CMatrix<T>> {
    let mut w = combiner.v.clone();
    for (k, mut col) in w.column_iter_mut().enumerate() {
        let n = col.norm();
        if !(n > T::zero()) {
            return Err(Error::ZeroCombiningColumn(k));
        }
        col.scale_mut(T::one() / n);
    }
    Ok(w)
}

/// `x = W s`.
pub fn precode_signal<T: Real>(w: &CMatrix<T>, symbols: &CVector<T>) -> Result<CVector<T>> {
    if symbols.len() != w.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} symbols for {} precoding vectors",
            symbols.len(),
            w.ncols()
        )));
    }
    Ok(w * symbols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combining::{rzf_combiner, zf_combiner, CombinerMethod};
    use crate::scalar::c;
    use crate::scalar::{complex_normal, complex_normal_matrix};
    use crate::StreamKey;

    fn wrap(v: CMatrix<f64>) -> Combiner<f64> {
        Combiner {
            v,
            method: CombinerMethod::Rzf,
            d: None,
        }
    }

    #[test]
    fn identity_combiner_passes_through() {
        let mut rng = StreamKey::new(1).rng();
        let y = complex_normal_matrix::<f64, _>(3, 1, &mut rng)
            .column(0)
            .into_owned();
        let s = recover_signals(&wrap(CMatrix::identity(3, 3)), &y).unwrap();
        assert_eq!(s, y);
    }

    #[test]
    fn zf_recovers_noiseless_symbols() {
        let mut rng = StreamKey::new(2).rng();
        let g = complex_normal_matrix::<f64, _>(8, 3, &mut rng);
        let s = complex_normal_matrix::<f64, _>(3, 1, &mut rng)
            .column(0)
            .into_owned();
        let y = &g * &s;
        let hat = recover_signals(&zf_combiner(&g).unwrap(), &y).unwrap();
        assert!((hat - s).norm() < 1e-8);
    }

    #[test]
    fn scalar_rzf_recovery() {
        let g = CMatrix::from_element(1, 1, c(1.0));
        let y = CVector::from_element(1, c(2.0));
        let s = recover_signals(&rzf_combiner(&g, 1.0).unwrap(), &y).unwrap();
        assert!((s[0] - c(1.0)).norm() < 1e-15);
        assert!(recover_signals(&rzf_combiner(&g, 1.0).unwrap(), &CVector::zeros(2)).is_err());
    }

    #[test]
    fn precoder_normalization() {
        let mut rng = StreamKey::new(3).rng();
        let v = complex_normal_matrix::<f64, _>(6, 3, &mut rng);
        let w = precoder_from_combiner(&wrap(v.clone())).unwrap();
        for col in w.column_iter() {
            assert!((col.norm() - 1.0).abs() < 1e-12);
        }
        let w7 = precoder_from_combiner(&wrap(v.map(|x| x * c(7.0)))).unwrap();
        assert!((w7 - &w).norm() < 1e-12);

        let mut z = v;
        z.column_mut(1).fill(c(0.0));
        assert_eq!(
            precoder_from_combiner(&wrap(z)),
            Err(Error::ZeroCombiningColumn(1))
        );
    }

    #[test]
    fn precoded_power() {
        let mut rng = StreamKey::new(4).rng();
        let w = complex_normal_matrix::<f64, _>(8, 3, &mut rng).qr().q();
        assert!(precode_signal(&w, &CVector::zeros(3))
            .unwrap()
            .iter()
            .all(|x| x.norm() == 0.0));

        let w1 = precoder_from_combiner(&wrap(complex_normal_matrix(4, 1, &mut rng))).unwrap();
        let s = CVector::from_element(1, complex_normal::<f64, _>(&mut rng));
        assert!((precode_signal(&w1, &s).unwrap().norm() - s[0].norm()).abs() < 1e-12);

        let n = 10_000;
        let mut p = 0.0;
        for _ in 0..n {
            let s = complex_normal_matrix::<f64, _>(3, 1, &mut rng)
                .column(0)
                .into_owned();
            p += precode_signal(&w, &s).unwrap().norm_squared();
        }
        assert!((p / n as f64 / 3.0 - 1.0).abs() < 0.05);
    }
}
