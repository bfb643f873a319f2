use proptest::prelude::*;
use tremorscope::pyramid::*;
use tremorscope::Plane;

fn psnr_db(a: &Plane, b: &Plane) -> f64 {
    let mse = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / a.len() as f64;
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (1.0 / mse).log10()
    }
}

fn plane_from_seed(w: usize, h: usize, seed: u64) -> Plane {
    let mut s = seed | 1;
    Plane::from_fn(w, h, |_, _| {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        (s >> 11) as f64 / (1u64 << 53) as f64
    })
}

#[test]
fn random_64px_planes_reconstruct() {
    for seed in 0..100 {
        let p = plane_from_seed(64, 64, seed + 1);
        let pyr = build_laplacian(&p, default_depth(64, 64)).unwrap();
        assert!(psnr_db(&collapse(&pyr).unwrap(), &p) >= 48.0);
    }
}

#[test]
fn constant_plane_has_zero_bands() {
    let p = Plane::filled(40, 24, 0.37);
    for depth in 1..=max_depth(40, 24) {
        let pyr = build_laplacian(&p, depth).unwrap();
        assert!(pyr
            .levels()
            .iter()
            .all(|l| l.as_slice().iter().all(|v| v.abs() < 1e-12)));
        assert!(pyr
            .residual()
            .as_slice()
            .iter()
            .all(|v| (v - 0.37).abs() < 1e-12));
    }
}

#[test]
fn depth_too_large_is_rejected() {
    let p = Plane::zeros(32, 32);
    assert!(build_laplacian(&p, 4).is_ok());
    assert!(matches!(
        build_laplacian(&p, 5),
        Err(tremorscope::Error::DepthTooLarge { .. })
    ));
    assert!(build_laplacian(&p, 0).is_err());
}

#[test]
fn default_depth_rule() {
    assert_eq!(default_depth(640, 480), 5);
    assert_eq!(default_depth(64, 64), 3);
    assert_eq!(default_depth(32, 100), 2);
    assert_eq!(default_depth(16, 16), 1);
}

// Scaling one band by (1 + a) scales that band's contribution to the
// reconstruction, and its energy by (1 + a)^2, leaving the rest unchanged.
#[test]
fn scaling_one_level_scales_its_band() {
    let p = plane_from_seed(64, 48, 9);
    let pyr = build_laplacian(&p, 3).unwrap();
    let a = 4.0;
    for k in 0..3 {
        let mut scaled = pyr.clone();
        scaled.levels_mut()[k].scale(1.0 + a);
        let mut only = Pyramid::zeros(64, 48, 3).unwrap();
        only.levels_mut()[k] = pyr.level(k).clone();
        let band = collapse(&only).unwrap();
        let diff = collapse(&scaled)
            .unwrap()
            .zip_map(&collapse(&pyr).unwrap(), |x, y| x - y);
        let err = diff
            .as_slice()
            .iter()
            .zip(band.as_slice())
            .map(|(d, b)| (d - a * b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "level {k}: {err}");
        let mut only_scaled = only.clone();
        only_scaled.levels_mut()[k].scale(1.0 + a);
        let e0: f64 = band.as_slice().iter().map(|v| v * v).sum();
        let e1: f64 = collapse(&only_scaled)
            .unwrap()
            .as_slice()
            .iter()
            .map(|v| v * v)
            .sum();
        assert!((e1 / e0 - (1.0 + a) * (1.0 + a)).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reconstruction_psnr(w in 16usize..160, h in 16usize..160, depth in 1usize..=5, seed in any::<u64>()) {
        let depth = depth.min(max_depth(w, h));
        let p = plane_from_seed(w, h, seed);
        let pyr = build_laplacian(&p, depth).unwrap();
        for k in 0..depth {
            prop_assert_eq!(pyr.level(k).dims(), level_dims(w, h, k));
        }
        prop_assert!(psnr_db(&collapse(&pyr).unwrap(), &p) >= 48.0);
    }

    #[test]
    fn build_and_collapse_are_linear(w in 8usize..80, h in 8usize..80, seed in any::<u64>()) {
        let depth = max_depth(w, h).min(4);
        let i = plane_from_seed(w, h, seed);
        let j = plane_from_seed(w, h, seed ^ 0xdead_beef);
        let mix = i.zip_map(&j, |a, b| 0.3 * a + 0.7 * b);
        let (pi, pj, pm) = (
            build_laplacian(&i, depth).unwrap(),
            build_laplacian(&j, depth).unwrap(),
            build_laplacian(&mix, depth).unwrap(),
        );
        for k in 0..depth {
            let want = pi.level(k).zip_map(pj.level(k), |a, b| 0.3 * a + 0.7 * b);
            prop_assert!(pm.level(k).max_abs_diff(&want) <= 1e-9);
        }
        let want = pi.residual().zip_map(pj.residual(), |a, b| 0.3 * a + 0.7 * b);
        prop_assert!(pm.residual().max_abs_diff(&want) <= 1e-9);
        let ci = collapse(&pi).unwrap();
        let cj = collapse(&pj).unwrap();
        let cm = collapse(&pm).unwrap();
        prop_assert!(cm.max_abs_diff(&ci.zip_map(&cj, |a, b| 0.3 * a + 0.7 * b)) <= 1e-9);
    }
}
