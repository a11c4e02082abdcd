use std::f64::consts::PI;

use mmcoexist::antenna::{
    channel_matrix, total_gain_exact, ula_response, BeamVector, Path, PathSet,
};
use num_complex::Complex64;

fn element(n: usize, count: usize, angle: f64) -> Complex64 {
    Complex64::from_polar(1.0 / (count as f64).sqrt(), -PI * n as f64 * angle.sin())
}

fn brute_force_entry(paths: &PathSet, row: usize, col: usize) -> Complex64 {
    let (m, n, l) = (paths.rx_elements, paths.tx_elements, paths.paths.len());
    let scale = ((m * n) as f64 / l as f64).sqrt();
    let mut acc = Complex64::new(0.0, 0.0);
    for p in &paths.paths {
        acc += p.gain * element(row, m, p.aoa) * element(col, n, p.aod).conj();
    }
    acc * scale
}

fn brute_force_gain(paths: &PathSet, r: &BeamVector, w: &BeamVector) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, ri) in r.as_slice().iter().enumerate() {
        for (j, wj) in w.as_slice().iter().enumerate() {
            acc += ri.conj() * brute_force_entry(paths, i, j) * wj;
        }
    }
    acc.norm_sqr()
}

fn two_paths() -> PathSet {
    PathSet {
        paths: vec![
            Path {
                gain: Complex64::new(0.8, -0.3),
                aod: 0.4,
                aoa: -1.1,
            },
            Path {
                gain: Complex64::new(-0.2, 0.5),
                aod: -0.9,
                aoa: 0.25,
            },
        ],
        tx_elements: 4,
        rx_elements: 4,
    }
}

#[test]
fn matrix_matches_termwise_sum() {
    let paths = two_paths();
    let h = channel_matrix(&paths).unwrap();
    assert_eq!((h.rows(), h.cols()), (4, 4));
    for i in 0..4 {
        for j in 0..4 {
            let want = brute_force_entry(&paths, i, j);
            assert!((h.get(i, j) - want).norm() < 1e-12, "H[{i}][{j}]");
        }
    }
}

#[test]
fn gain_matches_double_sum() {
    let paths = two_paths();
    let h = channel_matrix(&paths).unwrap();
    for (aod, aoa) in [(0.4, -1.1), (-0.9, 0.25), (0.0, 0.0), (1.3, -0.6)] {
        let w = ula_response(4, aod).unwrap();
        let r = ula_response(4, aoa).unwrap();
        let got = total_gain_exact(&r, &h, &w).unwrap();
        let want = brute_force_gain(&paths, &r, &w);
        assert!(
            (got - want).abs() <= 1e-12 * want.max(1.0),
            "{got} vs {want}"
        );
    }
}

#[test]
fn mismatched_path_set_is_rejected() {
    let mut paths = two_paths();
    paths.paths.clear();
    assert!(channel_matrix(&paths).is_err());
}
