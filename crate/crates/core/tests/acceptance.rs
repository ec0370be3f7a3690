//! Acceptance gate. Runs without the libtest harness so that every criterion
//! prints exactly one PASS/FAIL line; the process exits non-zero if any fails.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use qcat::diagnostics::{layer_check, layer_cross_validate, nilpotency_check, LayerClass, LayerSpec};
use qcat::linalg::extreme_spectrum_in;
use qcat::metric::{coefficient_matrices, dieudonne_residual, dyson_hermitize_in, ketkets, metric_at, metric_at_in, metric_poly, PD_TOL};
use qcat::model::{analytic_spectrum, build_chain_in, build_chain_real, build_qc_limit, EnergyList, ModelParams, MultiParamCoeffs};
use qcat::observables::{f_pattern_residual, reality_check, solve_at, solve_z_independent};
use qcat::oracle::{dense_eigen_in, dense_eigen_real};
use qcat::polyring::uv_of_lambda;
use qcat::scalar::{Mp, Real};
use qcat::{Matrix, RealMatrix};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sorted_real(values: &[Complex64]) -> Vec<f64> {
    let mut v: Vec<f64> = values.iter().map(|z| z.re).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn mp_oracle_values(h: &Matrix<num_complex::Complex<Mp>>) -> Result<Vec<Complex64>, String> {
    dense_eigen_in(h, false).map(|r| r.values).map_err(|e| e.to_string())
}

fn spectrum_fidelity() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for n in 2..=10 {
        for lambda in [0.01, 0.25, 0.5, 1.0] {
            let p = ModelParams::new(n, lambda).map_err(|e| e.to_string())?;
            let got = EnergyList::new(mp_oracle_values(&build_chain_in::<Mp>(&p))?, 1e-9);
            let d = got.max_distance(&analytic_spectrum(&p));
            worst = worst.max(d);
            ensure(d < 1e-9, || format!("N={n} lambda={lambda}: deviation {d:.3e}"))?;
        }
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(5), || format!("took {t:.2?}"))?;
    Ok(format!("max deviation {worst:.2e}, {t:.2?}"))
}

fn entries_close(a: &RealMatrix, b: &[Vec<f64>], tol: f64, what: &str) -> Result<(), String> {
    let b = RealMatrix::from_rows(b);
    let d = a.sub(&b).max_abs();
    ensure(d < tol, || format!("{what}: deviation {d:.3e}"))
}

fn matrix_fixtures() -> Outcome {
    let start = Instant::now();
    let s2 = 2f64.sqrt();
    let s3 = 3f64.sqrt();
    let s6 = 6f64.sqrt();
    let zp = |c: &[f64]| -> Vec<f64> { c.to_vec() };
    let check_metric = |n: usize, want: &[Vec<Vec<f64>>]| -> Result<(), String> {
        let m = metric_poly(n).map_err(|e| e.to_string())?;
        for a in 0..n {
            for b in 0..n {
                let w = qcat::polyring::ZPoly::new(want[a][b].clone());
                let d = m.entry(a, b).distance(&w);
                ensure(d < 1e-10, || format!("metric N={n} entry ({a},{b}) off by {d:.3e}"))?;
            }
        }
        Ok(())
    };
    check_metric(2, &[vec![zp(&[1.0]), zp(&[0.0, -1.0])], vec![zp(&[0.0, -1.0]), zp(&[1.0])]])?;
    check_metric(
        3,
        &[
            vec![zp(&[1.0]), zp(&[0.0, -s2]), zp(&[0.0, 0.0, 1.0])],
            vec![zp(&[0.0, -s2]), zp(&[1.0, 0.0, 1.0]), zp(&[0.0, -s2])],
            vec![zp(&[0.0, 0.0, 1.0]), zp(&[0.0, -s2]), zp(&[1.0])],
        ],
    )?;

    let m5 = coefficient_matrices(5).map_err(|e| e.to_string())?;
    entries_close(
        m5.get(2),
        &[
            vec![0.0, 2.0, 0.0, 0.0, 0.0],
            vec![2.0, 0.0, s6, 0.0, 0.0],
            vec![0.0, s6, 0.0, s6, 0.0],
            vec![0.0, 0.0, s6, 0.0, 2.0],
            vec![0.0, 0.0, 0.0, 2.0, 0.0],
        ],
        1e-10,
        "M5(2)",
    )?;
    entries_close(
        m5.get(3),
        &[
            vec![0.0, 0.0, s6, 0.0, 0.0],
            vec![0.0, 3.0, 0.0, 3.0, 0.0],
            vec![s6, 0.0, 4.0, 0.0, s6],
            vec![0.0, 3.0, 0.0, 3.0, 0.0],
            vec![0.0, 0.0, s6, 0.0, 0.0],
        ],
        1e-10,
        "M5(3)",
    )?;
    let m4 = coefficient_matrices(4).map_err(|e| e.to_string())?;
    entries_close(
        m4.get(2),
        &[vec![0.0, s3, 0.0, 0.0], vec![s3, 0.0, 2.0, 0.0], vec![0.0, 2.0, 0.0, s3], vec![0.0, 0.0, s3, 0.0]],
        1e-10,
        "M4(2)",
    )?;
    entries_close(
        m4.get(3),
        &[vec![0.0, 0.0, s3, 0.0], vec![0.0, 2.0, 0.0, s3], vec![s3, 0.0, 2.0, 0.0], vec![0.0, s3, 0.0, 0.0]],
        1e-10,
        "M4(3)",
    )?;
    entries_close(
        &build_qc_limit(4).map_err(|e| e.to_string())?,
        &[
            vec![3.0, s3, 0.0, 0.0],
            vec![-s3, 1.0, 2.0, 0.0],
            vec![0.0, -2.0, -1.0, s3],
            vec![0.0, 0.0, -s3, -3.0],
        ],
        1e-12,
        "H4 at the catastrophe",
    )?;
    entries_close(&build_qc_limit(2).map_err(|e| e.to_string())?, &[vec![1.0, 1.0], vec![-1.0, -1.0]], 1e-12, "H2 at the catastrophe")?;
    let t = start.elapsed();
    ensure(t < Duration::from_secs(1), || format!("took {t:.2?}"))?;
    Ok(format!("metrics N=2,3, M5(2..3), M4(2..3), QC N=2,4 match; {t:.2?}"))
}

/// Coefficient lists in descending powers of `u`.
fn ketket_fixtures() -> Outcome {
    let s2 = 2f64.sqrt();
    let s3 = 3f64.sqrt();
    let cases: Vec<(usize, usize, Vec<Vec<f64>>)> = vec![
        (2, 0, vec![vec![1.0, 0.0], vec![0.0, -1.0]]),
        (2, 1, vec![vec![0.0, -1.0], vec![1.0, 0.0]]),
        (3, 0, vec![vec![1.0, 0.0, 0.0], vec![0.0, -s2, 0.0], vec![0.0, 0.0, 1.0]]),
        (3, 1, vec![vec![0.0, -s2, 0.0], vec![1.0, 0.0, 1.0], vec![0.0, -s2, 0.0]]),
        (3, 2, vec![vec![0.0, 0.0, 1.0], vec![0.0, -s2, 0.0], vec![1.0, 0.0, 0.0]]),
        (
            4,
            0,
            vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, -s3, 0.0, 0.0], vec![0.0, 0.0, s3, 0.0], vec![0.0, 0.0, 0.0, -1.0]],
        ),
    ];
    let mut worst = 0.0_f64;
    for (n, row, want) in cases {
        let set = ketkets(n).map_err(|e| e.to_string())?;
        let got = set.row(row);
        let dev = |sign: f64| -> f64 {
            got.iter()
                .zip(&want)
                .flat_map(|(p, w)| w.iter().enumerate().map(move |(m, &c)| (p.coeff(m) - sign * c).abs()))
                .fold(0.0, f64::max)
        };
        let d = dev(1.0).min(dev(-1.0));
        worst = worst.max(d);
        ensure(d < 1e-10, || format!("N={n} row {row}: deviation {d:.3e}"))?;
    }
    Ok(format!("6 reference ketkets match up to sign, max deviation {worst:.2e}"))
}

fn dieudonne() -> Outcome {
    let mut worst = 0.0_f64;
    for n in 2..=10 {
        for lambda in [0.1, 0.5, 0.9] {
            let theta = metric_at(n, lambda).map_err(|e| e.to_string())?;
            let h = build_chain_real(&ModelParams::new(n, lambda).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            let r = dieudonne_residual(&h, &theta) / theta.max_abs();
            worst = worst.max(r);
            ensure(r < 1e-9, || format!("N={n} lambda={lambda}: relative residual {r:.3e}"))?;
        }
    }
    Ok(format!("max relative residual {worst:.2e}"))
}

fn observable_counts() -> Outcome {
    for n in 2..=6 {
        let mp = metric_poly(n).map_err(|e| e.to_string())?;
        for z in [0.2, 0.5, 0.8] {
            let dim = solve_at(&mp.eval_z(&z)).map_err(|e| format!("N={n} z={z}: {e}"))?.dim();
            ensure(dim == n * (n + 1) / 2, || format!("N={n} z={z}: dimension {dim}"))?;
        }
    }
    for z in [0.2, 0.5, 0.8] {
        let b = solve_at(&metric_poly(2).map_err(|e| e.to_string())?.eval_z(&z)).map_err(|e| e.to_string())?;
        for g in &b.basis {
            let r = (g[(1, 0)] - g[(0, 1)] - z * (g[(0, 0)] - g[(1, 1)])).abs();
            ensure(r < 1e-9, || format!("N=2 rule violated by {r:.3e} at z={z}"))?;
        }
    }
    let b3 = solve_z_independent(3, &metric_poly(3).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure(b3.dim() == 3, || format!("z-independent N=3 dimension {}", b3.dim()))?;
    for g in &b3.basis {
        let r = f_pattern_residual(g);
        ensure(r < 1e-9, || format!("z-independent element off the F pattern by {r:.3e}"))?;
    }
    let f = RealMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 2.0], vec![3.0, 2.0, 1.0]]);
    ensure(reality_check(&f, 1e-9), || "F(1,2,3) reported non-real".into())?;
    let got = sorted_real(&dense_eigen_real(&f, false).map_err(|e| e.to_string())?.values);
    let s = 2.0 * 2f64.sqrt();
    let want = [-2.0, 4.0 - s, 4.0 + s];
    let d = got.iter().zip(want).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    ensure(d < 1e-8, || format!("F(1,2,3) eigenvalues {got:?}"))?;
    Ok(format!("dims N(N+1)/2 for N=2..6, F(1,2,3) deviation {d:.2e}"))
}

fn hermitization() -> Outcome {
    let mut worst_sym = 0.0_f64;
    let mut worst_iso = 0.0_f64;
    for n in 2..=8 {
        for lambda in [0.25, 0.75] {
            let p = ModelParams::new(n, lambda).map_err(|e| e.to_string())?;
            let hc = build_chain_in::<Mp>(&p);
            let h = hc.map(|z| z.re.clone());
            let theta = metric_at_in::<Mp>(n, lambda).map_err(|e| e.to_string())?;
            let hh = dyson_hermitize_in(&h, &theta, PD_TOL).map_err(|e| format!("N={n} lambda={lambda}: {e}"))?;
            let hf = hh.map(|x| x.to_f64());
            let sym = hf.asymmetry() / hf.max_abs().max(1.0);
            let a = sorted_real(&mp_oracle_values(&hh.map(|x| num_complex::Complex::new(x.clone(), Mp::from_f64(0.0))))?);
            let b = sorted_real(&mp_oracle_values(&hc)?);
            let iso = a.iter().zip(&b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
            worst_sym = worst_sym.max(sym);
            worst_iso = worst_iso.max(iso);
            ensure(sym < 1e-9, || format!("N={n} lambda={lambda}: asymmetry {sym:.3e}"))?;
            ensure(iso < 1e-8, || format!("N={n} lambda={lambda}: spectra differ by {iso:.3e}"))?;
        }
    }
    Ok(format!("asymmetry {worst_sym:.2e}, spectral deviation {worst_iso:.2e}"))
}

fn catastrophe() -> Outcome {
    for n in 2..=8 {
        ensure(nilpotency_check(n).map_err(|e| e.to_string())?, || format!("N={n} not nilpotent"))?;
    }
    let mut worst = 0.0_f64;
    for n in 2..=10 {
        for lambda in [-0.25, -1.0] {
            let p = ModelParams::new(n, lambda).map_err(|e| e.to_string())?;
            let values = mp_oracle_values(&build_chain_in::<Mp>(&p))?;
            let got = EnergyList::new(values.clone(), 1e-9);
            ensure(!got.real_flag, || format!("N={n} lambda={lambda}: spectrum reported real"))?;
            for z in &values {
                let pair = values.iter().map(|w| (w - z.conj()).norm()).fold(f64::INFINITY, f64::min);
                ensure(pair < 1e-8, || format!("N={n} lambda={lambda}: {z} has no conjugate partner"))?;
            }
            let d = got.max_distance(&analytic_spectrum(&p));
            worst = worst.max(d);
            ensure(d < 1e-8, || format!("N={n} lambda={lambda}: deviation {d:.3e}"))?;
        }
    }
    let mins: Vec<f64> = [0.5, 0.1, 0.01, 0.001]
        .iter()
        .map(|&l| metric_at_in::<Mp>(4, l).map(|t| extreme_spectrum_in(&t).0))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    ensure(mins.windows(2).all(|w| w[1] < w[0]), || format!("N=4 metric minima not decreasing: {mins:?}"))?;
    ensure(mins[3] < 1e-2, || format!("N=4 metric minimum {:.3e} at lambda=0.001", mins[3]))?;
    Ok(format!(
        "nilpotent N<=8, imaginary spectra deviation {worst:.2e}, N=4 metric minima {:.1e} > {:.1e} > {:.1e} > {:.1e}",
        mins[0], mins[1], mins[2], mins[3]
    ))
}

fn layer_geometry() -> Outcome {
    let spec = LayerSpec::with_known_bounds(4).map_err(|e| e.to_string())?;
    let (lo, hi) = spec.bounds().map_err(|e| e.to_string())?;
    ensure((lo + 0.25).abs() < 1e-12 && (hi - 4.0 / 9.0).abs() < 1e-12, || format!("bounds [{lo}, {hi}]"))?;
    let class = layer_check(&spec, &MultiParamCoeffs::new(vec![0.0, 0.0])).map_err(|e| e.to_string())?;
    ensure(class == LayerClass::Inside, || "origin not inside the layer".into())?;
    let samples: Vec<MultiParamCoeffs> = (0..=20)
        .flat_map(|i| (0..=20).map(move |j| MultiParamCoeffs::new(vec![-1.0 + 0.1 * i as f64, -1.0 + 0.1 * j as f64])))
        .collect();
    let report = layer_cross_validate(4, &samples, 1e-3).map_err(|e| e.to_string())?;
    let inside = report.rows.iter().filter(|r| r.class == LayerClass::Inside).count();
    ensure(report.rows.len() >= 20, || format!("only {} samples clear of the margin", report.rows.len()))?;
    ensure(inside > 0 && inside < report.rows.len(), || "samples do not straddle the layer".into())?;
    ensure(report.disagreements() == 0, || format!("{} disagreements", report.disagreements()))?;
    Ok(format!(
        "bounds [-1/4, 4/9], {} samples checked ({inside} inside), {} near the boundary skipped, 0 disagreements",
        report.rows.len(),
        report.excluded.len()
    ))
}

/// Code (not comments) that names `module` through a crate path.
fn uses_module(src: &str, module: &str) -> bool {
    src.lines()
        .map(str::trim_start)
        .filter(|l| !l.starts_with("//"))
        .any(|l| l.contains(&format!("crate::{module}")) || l.contains(&format!("super::{module}")))
}

fn oracle_independence() -> Outcome {
    let sources = [
        ("metric", include_str!("../src/metric.rs")),
        ("polyring", include_str!("../src/polyring.rs")),
        ("linalg", include_str!("../src/linalg.rs")),
    ];
    for (name, src) in sources {
        ensure(!uses_module(src, "oracle"), || format!("{name} depends on the oracle"))?;
    }
    let oracle = include_str!("../src/oracle.rs");
    for dep in ["metric", "polyring", "linalg"] {
        ensure(!uses_module(oracle, dep), || format!("oracle depends on {dep}"))?;
    }
    let mut worst = 0.0_f64;
    for n in 2..=10 {
        let set = ketkets(n).map_err(|e| e.to_string())?;
        for lambda in [0.1, 0.5, 0.9] {
            let p = ModelParams::new(n, lambda).map_err(|e| e.to_string())?;
            let (u, v) = uv_of_lambda(lambda).map_err(|e| e.to_string())?;
            let kets = set.eval_uv(&u, &v);
            let hdag = build_chain_in::<Mp>(&p).adjoint();
            let vecs = dense_eigen_in(&hdag, true).map_err(|e| e.to_string())?.vectors.ok_or("no eigenvectors")?;
            for i in 0..n {
                let col = vecs.column(set.energy_index(i));
                let row = kets.row(i);
                let dot: Complex64 = row.iter().zip(&col).map(|(a, b)| b.conj() * a).sum();
                let na = row.iter().map(|x| x * x).sum::<f64>().sqrt();
                let nb = col.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                let cos = dot.norm() / (na * nb);
                worst = worst.max(1.0 - cos);
                ensure(cos >= 1.0 - 1e-8, || format!("N={n} lambda={lambda} row {i}: cosine {cos}"))?;
            }
        }
    }
    Ok(format!("no shared eigensolver code, min cosine 1 - {worst:.1e}"))
}

fn main() {
    // The runtime budget is stated for one core.
    rayon::ThreadPoolBuilder::new().num_threads(1).build_global().expect("thread pool");
    let total = Instant::now();
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("spectrum fidelity", spectrum_fidelity),
        ("matrix fixtures", matrix_fixtures),
        ("ketket fixtures", ketket_fixtures),
        ("crypto-hermiticity residual", dieudonne),
        ("observable counts", observable_counts),
        ("hermitization", hermitization),
        ("catastrophe behavior", catastrophe),
        ("layer geometry", layer_geometry),
        ("oracle independence", oracle_independence),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS  {:>2} {name}: {detail} [{t:.2?}]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {:>2} {name}: {detail} [{t:.2?}]", k + 1);
            }
        }
    }
    let t = total.elapsed();
    if t < Duration::from_secs(60) {
        println!("PASS  10 full suite runtime: {t:.2?}");
    } else {
        failed += 1;
        println!("FAIL  10 full suite runtime: {t:.2?} exceeds 60 s");
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
