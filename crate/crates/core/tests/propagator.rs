use cone_schrodinger::cutoff::BumpKind;
use cone_schrodinger::propagator::*;
use cone_schrodinger::*;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

struct Setup {
    grid: Arc<RadialGrid>,
    spec_grid: Arc<RadialGrid>,
    table: Arc<SpectrumTable>,
}

fn plane(k: f64) -> Setup {
    let grid = Arc::new(make_grid(2, 200.0, 4096, GridKind::LogUniform { r_min: 1e-5 }).unwrap());
    let spec_grid = Arc::new(spectral_grid_for(&grid, 1e-5, 12.0).unwrap());
    let table = Arc::new(build_spectrum(&ConeModel::euclidean_plane(), k).unwrap());
    Setup { grid, spec_grid, table }
}

fn gaussian_datum(s: &Setup) -> ModeField {
    let c = (2.0 * PI).sqrt();
    ModeField::single_mode(s.table.clone(), s.grid.clone(), 0, 1, |r| c * (-0.5 * r * r).exp()).unwrap()
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn max_abs(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

#[test]
fn fourier_transform_is_isometric() {
    let s = plane(1.0);
    let u0 = gaussian_datum(&s);
    let b = distorted_fourier(&u0, &s.spec_grid).unwrap();
    assert!((b.norm() - u0.norm()).abs() < 1e-6 * u0.norm());
}

#[test]
fn matches_free_evolution_in_the_plane() {
    let s = plane(1.0);
    let c = (2.0 * PI).sqrt();
    let b = distorted_fourier(&gaussian_datum(&s), &s.spec_grid).unwrap();
    for &t in &[-2.0, -1.0, -0.25, 0.0, 0.3, 1.0, 1.7, 2.0] {
        let u = evolve(&b, t, &s.grid).unwrap();
        for (i, &r) in s.grid.nodes.iter().enumerate().filter(|(_, &r)| r <= 8.0) {
            let exact = c * euclidean_gaussian(t, r);
            assert!((u.data[0][i] - exact).norm() < 1e-4, "t = {t}, r = {r}");
        }
    }
}

#[test]
fn mass_is_conserved() {
    let s = plane(3.0);
    let mut u0 = gaussian_datum(&s);
    let pos = u0.mode_position(3, 2).unwrap();
    u0.data[pos] = s.grid.nodes.iter().map(|&r| Complex64::new(0.0, r.powi(3) * (-0.5 * r * r).exp())).collect();
    let m0 = u0.mass();
    let b = distorted_fourier(&u0, &s.spec_grid).unwrap();
    let times = [-10.0, -1.0, 0.0, 0.1, 1.0, 10.0];
    let ev = sample_solution(&b, &times, &s.grid).unwrap();
    assert_eq!(ev.fields.len(), times.len());
    assert!(ev.mass_defect(m0) < 1e-6, "{}", ev.mass_defect(m0));
}

#[test]
fn semigroup_through_physical_space() {
    let s = plane(1.0);
    let b = distorted_fourier(&gaussian_datum(&s), &s.spec_grid).unwrap();
    let (t1, t2) = (0.4, 0.7);
    let direct = evolve(&b, t1 + t2, &s.grid).unwrap();
    let half = evolve(&b, t1, &s.grid).unwrap();
    let b1 = distorted_fourier(&half, &s.spec_grid).unwrap();
    let composed = evolve(&b1, t2, &s.grid).unwrap();
    assert!(max_diff(&direct.data[0], &composed.data[0]) < 1e-5 * max_abs(&direct.data[0]));
}

#[test]
fn time_reversal_restores_datum() {
    let s = plane(1.0);
    let u0 = gaussian_datum(&s);
    let b = distorted_fourier(&u0, &s.spec_grid).unwrap();
    let forward = evolve(&b, 1.5, &s.grid).unwrap();
    let back = evolve(&distorted_fourier(&forward, &s.spec_grid).unwrap(), -1.5, &s.grid).unwrap();
    assert!(max_diff(&back.data[0], &u0.data[0]) < 1e-5 * max_abs(&u0.data[0]));
}

#[test]
fn single_mode_stays_single_mode() {
    let s = plane(4.0);
    let u0 = ModeField::single_mode(s.table.clone(), s.grid.clone(), 2, 1, |r| r * r * (-0.5 * r * r).exp()).unwrap();
    let b = distorted_fourier(&u0, &s.spec_grid).unwrap();
    let ev = sample_solution(&b, &[0.0, 0.5, 3.0], &s.grid).unwrap();
    for f in &ev.fields {
        assert_eq!(f.active_modes(), u0.active_modes());
    }
}

#[test]
fn partition_localization_reconstructs() {
    let s = plane(1.0);
    let b = distorted_fourier(&gaussian_datum(&s), &s.spec_grid).unwrap();
    let mut sum = vec![Complex64::new(0.0, 0.0); s.spec_grid.len()];
    for k in -20..=4 {
        let piece = frequency_localize(&b, 2f64.powi(k), BumpKind::Partition).unwrap();
        for (acc, v) in sum.iter_mut().zip(&piece.data[0]) {
            *acc += v;
        }
    }
    assert!(max_diff(&sum, &b.data[0]) < 1e-8);
}

#[test]
fn evolution_of_zero_is_zero() {
    let s = plane(2.0);
    let z = ModeField::zeros(s.table.clone(), s.grid.clone());
    let b = distorted_fourier(&z, &s.spec_grid).unwrap();
    let ev = sample_solution(&b, &[0.0, 1.0], &s.grid).unwrap();
    assert!(ev.masses.iter().all(|&m| m == 0.0));
}
