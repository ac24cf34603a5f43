use rka_core::channel::*;
use rka_core::estimation::*;
use rka_core::{CMatrix, StreamKey};

fn config_with_snr(m: usize, k: usize, tau_p_rho: f64) -> SystemConfig {
    let mut cfg = SystemConfig::dense_urban(m, k);
    cfg.noise_power_dbm = 0.0;
    cfg.ul_power_dbm = 10.0 * (tau_p_rho / k as f64).log10();
    cfg
}

#[test]
fn ls_nmse_at_unit_effective_snr() {
    let cfg = config_with_snr(8, 1, 1.0);
    let cov = CovarianceSet::<f64>::from_matrices(vec![CMatrix::identity(8, 8)]).unwrap();
    let mut rng = StreamKey::new(1).rng();
    let mut est = Vec::new();
    let mut gs = Vec::new();
    for _ in 0..4000 {
        let g = sample_channel(&cov, &mut rng).g;
        est.push(ls_estimate(&observe_pilots(&g, &cfg, &mut rng), &cfg));
        gs.push(g);
    }
    let nmse = nmse(&est, &gs, &cov).unwrap()[0];
    assert!((nmse - 1.0).abs() <= 0.05, "{nmse}");
}

#[test]
fn mmse_orthogonality_and_ls_unbiasedness() {
    let cfg = config_with_snr(4, 1, 2.0);
    let mut rng = StreamKey::new(2).rng();
    let entry = covariance_correlated::<f64, _>(0.0, 0.5, 0.7, 0.0, 4, &mut rng).unwrap();
    let cov = CovarianceSet::from_entries(vec![entry]).unwrap();
    let mmse = MmseEstimator::new(&cov, &cfg).unwrap();
    let n = 10_000;
    let mut cross = CMatrix::<f64>::zeros(4, 4);
    let mut err_bias = CMatrix::<f64>::zeros(4, 1);
    let (mut p_hat, mut p_err) = (0.0, 0.0);
    for _ in 0..n {
        let g = sample_channel(&cov, &mut rng).g;
        let obs = observe_pilots(&g, &cfg, &mut rng);
        let gh = mmse.estimate(&obs).ghat;
        let e = &g - &gh;
        cross += &gh * e.adjoint();
        p_hat += gh.norm_squared();
        p_err += e.norm_squared();
        err_bias += ls_estimate(&obs, &cfg).ghat - &g;
    }
    let norm = (p_hat * p_err).sqrt() / 4.0;
    for x in cross.iter() {
        assert!(x.norm() / norm <= 0.02, "{}", x.norm() / norm);
    }
    // LS error per entry has variance 1/(tau_p rho) = 0.5, split over re/im
    let sd = (0.25f64 / n as f64).sqrt();
    for x in err_bias.iter() {
        let mean = x / n as f64;
        assert!(mean.re.abs() <= 4.0 * sd && mean.im.abs() <= 4.0 * sd);
    }
    assert!(p_hat / n as f64 <= cov.trace(0));
}

#[test]
fn mmse_no_worse_than_ls_across_table_scenarios() {
    for (i, (m, k, model)) in [
        (100, 10, CovarianceModel::Uncorrelated),
        (100, 10, CovarianceModel::Correlated),
        (100, 30, CovarianceModel::Correlated),
    ]
    .into_iter()
    .enumerate()
    {
        let cfg = SystemConfig::dense_urban(m, k);
        let mut rng = StreamKey::new(10 + i as u64).rng();
        let drop = drop_users(&cfg, &mut rng).unwrap();
        let cov = CovarianceSet::<f64>::generate(&cfg, &drop, model, &mut rng).unwrap();
        let mmse = MmseEstimator::new(&cov, &cfg).unwrap();
        let (mut ls, mut mm, mut gs) = (Vec::new(), Vec::new(), Vec::new());
        for _ in 0..100 {
            let g = sample_channel(&cov, &mut rng).g;
            let obs = observe_pilots(&g, &cfg, &mut rng);
            ls.push(ls_estimate(&obs, &cfg));
            mm.push(mmse.estimate(&obs));
            gs.push(g);
        }
        let a = nmse(&ls, &gs, &cov).unwrap();
        let b = nmse(&mm, &gs, &cov).unwrap();
        for u in 0..k {
            assert!(b[u] <= a[u] + 0.01, "UE {u}: MMSE {} LS {}", b[u], a[u]);
        }
    }
}
