use cesaro_core::fbm::{normals, sample_paths, FbmConfig, Mode};
use cesaro_core::kernels::{covariance_n, covariance_n_direct, gram, kernel_k, GramSource, KernelSpec, Strategy as Route};
use cesaro_core::laplace::kernel::kernel_k_complex;
use cesaro_core::laplace::{laplace, HalfPlanePoint};
use cesaro_core::ops::cesaro::{cesaro_plus, cesaro_star, cesaro_star_subordinated};
use cesaro_core::RealFn;
use num_complex::Complex64;
use proptest::prelude::*;

fn point() -> impl Strategy<Value = f64> {
    (-2.0f64..2.0).prop_map(|e| 10f64.powf(e))
}

fn order() -> impl Strategy<Value = f64> {
    0.55f64..3.5
}

fn half_plane() -> impl Strategy<Value = HalfPlanePoint> {
    (point(), -1.5f64..1.5).prop_map(|(m, th)| HalfPlanePoint::new(m, th).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_symmetric_and_homogeneous(a in order(), s in point(), t in point(), l in point()) {
        let spec = KernelSpec::new(a, Route::Hypergeometric).unwrap();
        let k = kernel_k(spec, s, t).unwrap();
        prop_assert!(k > 0.0);
        prop_assert_eq!(k, kernel_k(spec, t, s).unwrap());
        prop_assert!(rel(l * kernel_k(spec, l * s, l * t).unwrap(), k) < 1e-10);
    }

    #[test]
    fn kernel_hypergeometric_matches_oracle(a in order(), s in point(), t in point()) {
        let h = kernel_k(KernelSpec::new(a, Route::Hypergeometric).unwrap(), s, t).unwrap();
        let q = kernel_k(KernelSpec::new(a, Route::QuadratureOracle).unwrap(), s, t).unwrap();
        prop_assert!(rel(h, q) < 1e-8, "a={} s={} t={}: {} vs {}", a, s, t, h, q);
    }

    #[test]
    fn covariance_closed_form_matches_quadrature(a in order(), s in point(), t in point()) {
        let n = covariance_n(a, s, t).unwrap();
        let d = covariance_n_direct(a, s, t).unwrap();
        prop_assert!(rel(n, d.value) < 1e-8, "a={} s={} t={}: {} vs {:?}", a, s, t, n, d);
    }

    #[test]
    fn kernel_bounded_by_geometric_mean_of_diagonals(a in order(), s in point(), t in point()) {
        let spec = KernelSpec::new(a, Route::Hypergeometric).unwrap();
        let k = kernel_k(spec, s, t).unwrap();
        let bound = (kernel_k(spec, s, s).unwrap() * kernel_k(spec, t, t).unwrap()).sqrt();
        prop_assert!(k <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn first_order_average_of_exponential(r in 0.1f64..10.0, t in point()) {
        let f = RealFn::exponential(r).unwrap();
        let x = r * t;
        let exact = -(-x).exp_m1() / x;
        prop_assert!(rel(cesaro_plus(&f, 1.0, t).unwrap().value, exact) < 1e-10);
    }

    #[test]
    fn adjoint_routes_agree(a in 0.3f64..3.0, r in 0.1f64..10.0, t in point()) {
        let f = RealFn::exponential(r).unwrap();
        let d = cesaro_star(&f, a, t).unwrap();
        let s = cesaro_star_subordinated(&f, a, t).unwrap();
        // deep in the exponential tail both routes sit on their absolute error floor
        let allowed = 1e-8 * d.value.abs() + d.error + s.error;
        prop_assert!((d.value - s.value).abs() <= allowed, "a={} r={} t={}: {:?} vs {:?}", a, r, t, d, s);
    }

    #[test]
    fn laplace_of_exponential(c in 0.1f64..5.0, z in half_plane()) {
        let v = laplace(&RealFn::exponential(c).unwrap(), z).unwrap();
        let exact = 1.0 / (z.z() + c);
        prop_assert!((v.value - exact).norm() <= 1e-10 * exact.norm());
    }

    #[test]
    fn reflection_is_an_involution(z in half_plane()) {
        let back = z.reflect().reflect();
        prop_assert!((back.z() - z.z()).norm() <= 1e-14 * z.modulus());
        prop_assert!((z.reflect().z() - Complex64::new(0.25, 0.0) / z.z()).norm() <= 1e-14 / z.modulus());
    }

    #[test]
    fn gram_matrices_factor(a in 0.0f64..2.5, mut grid in proptest::collection::vec(point(), 2..12)) {
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let g = gram(GramSource::CovarianceB(a), &grid).unwrap();
        let l = &g.factor.lower;
        let back = l * l.transpose();
        let scale = g.entries.amax();
        prop_assert!((back - &g.entries).amax() <= 1e-10 * scale + g.factor.jitter * 2.0);
    }

    #[test]
    fn normal_streams_are_deterministic(seed in any::<u64>(), stream in 0u64..1000) {
        let a = normals(seed, stream, 17);
        prop_assert_eq!(&a, &normals(seed, stream, 17));
        prop_assert_ne!(a, normals(seed, stream + 1, 17));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn half_plane_kernel_hermitian_and_homogeneous(a in 0.3f64..2.5, z in half_plane(), w in half_plane(), l in 0.2f64..5.0) {
        let k = kernel_k_complex(a, z, w).unwrap().value;
        let kt = kernel_k_complex(a, w, z).unwrap().value;
        prop_assert!((k - kt.conj()).norm() <= 1e-9 * k.norm());
        let ks = kernel_k_complex(a, z.scale(l).unwrap(), w.scale(l).unwrap()).unwrap().value;
        prop_assert!((ks * l - k).norm() <= 1e-9 * k.norm());
    }

    #[test]
    fn sampling_ignores_thread_count(seed in any::<u64>()) {
        let cfg = FbmConfig { grid: vec![0.1, 0.4, 1.0], alpha: 0.7, n_paths: 64, seed, mode: Mode::NProcess };
        let a = sample_paths(&cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| sample_paths(&cfg).unwrap());
        prop_assert_eq!(a, b);
    }
}
