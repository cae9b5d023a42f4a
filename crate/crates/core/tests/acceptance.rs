//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use dw_core::denjoy_wolff::{orbit, solve, theorem1_harness, DwCase, DwOptions};
use dw_core::domains::{DomainTag, SpherePoint};
use dw_core::freeconv::{
    free_additive_convolve, free_mult_convolve_circle, free_mult_convolve_positive,
    AdditiveConvolution, CircleConvolution, DEFAULT_EPS,
};
use dw_core::measures::{catalog, Atom, MeasureRep, NevanlinnaData, Support};
use dw_core::numerics::linspace_step;
use dw_core::selfmaps::SelfMap;
use dw_core::subordination::{
    subordinate_disk, Param, RowKind, SubordinationOptions, Subordinator,
};
use dw_core::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn dw() -> DwOptions {
    DwOptions::default()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn semicircle_sum() -> Outcome {
    let start = Instant::now();
    let sc = catalog::semicircle(1.0, 2001).map_err(|e| e.to_string())?;
    let edge = 8f64.sqrt();
    let grid: Vec<f64> = linspace_step(-2.7, 2.7, 0.01)
        .into_iter()
        .filter(|x| (x.abs() - edge).abs() > 0.05)
        .collect();
    let out =
        free_additive_convolve(&sc, &sc, &grid, &DEFAULT_EPS, &dw()).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let err = grid
        .iter()
        .zip(&out.density)
        .map(|(x, d)| (d - (8.0 - x * x).max(0.0).sqrt() / (4.0 * PI)).abs())
        .fold(0.0, f64::max);
    check(
        err <= 1e-5 && secs <= 10.0 && out.diagnostics.failures.is_empty(),
        format!(
            "max error {err:.2e} over {} points in {secs:.2} s",
            grid.len()
        ),
    )
}

fn bernoulli_sum() -> Outcome {
    let b = catalog::bernoulli();
    let grid = linspace_step(-1.9, 1.9, 0.01);
    let out =
        free_additive_convolve(&b, &b, &grid, &DEFAULT_EPS, &dw()).map_err(|e| e.to_string())?;
    let at0 = grid
        .iter()
        .position(|x| x.abs() < 1e-9)
        .ok_or("0 not on grid")?;
    let e0 = (out.density[at0] - 1.0 / (2.0 * PI)).abs();
    let err = grid
        .iter()
        .zip(&out.density)
        .map(|(x, d)| (d - 1.0 / (PI * (4.0 - x * x).sqrt())).abs())
        .fold(0.0, f64::max);
    check(
        e0 <= 1e-6 && err <= 1e-4,
        format!("error at 0 {e0:.2e}, max error {err:.2e}"),
    )
}

fn point_mass_sum() -> Outcome {
    let grid = linspace_step(-4.0, 4.0, 0.5);
    let mut worst: f64 = 0.0;
    for (a, b) in [(0.0, 0.0), (1.0, 2.0), (-3.0, 0.5)] {
        let d = |x| MeasureRep::point_mass(Support::RealLine, x, 1.0).unwrap();
        let out = free_additive_convolve(&d(a), &d(b), &grid, &DEFAULT_EPS, &dw())
            .map_err(|e| e.to_string())?;
        let atom = out
            .atoms
            .iter()
            .find(|t| (t.0 - (a + b)).abs() < 1e-12)
            .ok_or("missing atom")?;
        worst = worst.max((atom.1 - 1.0).abs());
    }
    check(worst <= 1e-8, format!("worst mass defect {worst:.2e}"))
}

fn quadratic_interior() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_point, mut worst_ratio): (f64, f64) = (0.0, 0.0);
    for _ in 0..20 {
        let cc = loop {
            let v = c(rng.gen_range(-0.25..0.25), rng.gen_range(-0.25..0.25));
            if v.norm() < 0.25 && v.norm() > 1e-3 {
                break v;
            }
        };
        // lambda^2 + c keeps the disk of radius 1/2 inside itself; solve the
        // conjugate 2 phi(lambda/2) = lambda^2/2 + 2c on the unit disk
        let psi = SelfMap::polynomial(DomainTag::Disk, vec![2.0 * cc, c(0.0, 0.0), c(0.5, 0.0)])
            .map_err(|e| e.to_string())?;
        let r = solve(&psi, &dw()).map_err(|e| e.to_string())?;
        if r.case != DwCase::InteriorAttracting {
            return Err(format!("c = {cc}: case {}", r.case.name()));
        }
        let p = r.finite_point().ok_or("no point")? / 2.0;
        let oracle = (1.0 - (1.0 - 4.0 * cc).sqrt()) / 2.0;
        worst_point = worst_point.max((p - oracle).norm());
        // contraction of the orbit of lambda^2 + c itself
        let d: Vec<f64> = orbit(&psi, c(0.6, 0.3), 400)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|w| (w / 2.0 - oracle).norm())
            .collect();
        let k = (0..d.len() - 1)
            .rev()
            .find(|&k| d[k] < 1e-4 && d[k + 1] > 1e-11)
            .ok_or_else(|| format!("c = {cc}: orbit never in the measuring window"))?;
        let want = (2.0 * oracle).norm();
        worst_ratio = worst_ratio.max((d[k + 1] / d[k] - want).abs() / want);
    }
    check(
        worst_point <= 1e-10 && worst_ratio <= 0.05,
        format!(
            "worst point error {worst_point:.2e}, worst relative ratio error {worst_ratio:.2e}"
        ),
    )
}

fn harness() -> Outcome {
    let limit =
        SelfMap::affine(DomainTag::Disk, c(0.5, 0.0), c(0.5, 0.0)).map_err(|e| e.to_string())?;
    let fam = |n: usize| {
        let s = 1.0 - 1.0 / n as f64;
        SelfMap::affine(DomainTag::Disk, c(0.5 * s, 0.0), c(0.5 * s, 0.0))
    };
    let ns = [10, 100, 1000, 10_000];
    let (_, rows) = theorem1_harness(fam, &limit, &ns, &dw()).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for r in &rows {
        let n = r.n as f64;
        let p = r.point.as_finite().ok_or("infinite point")?;
        worst = worst.max((p - c((n - 1.0) / (n + 1.0), 0.0)).norm());
    }
    let monotone = rows.windows(2).all(|w| w[1].distance < w[0].distance);
    check(
        worst <= 1e-9 && monotone,
        format!("worst point error {worst:.2e}, distances monotone: {monotone}"),
    )
}

fn disk_continuity() -> Outcome {
    let phi =
        SelfMap::affine(DomainTag::Disk, c(0.5, 0.0), c(0.5, 0.0)).map_err(|e| e.to_string())?;
    let mut grid = dw_core::selfmaps::sample_points(DomainTag::Disk, 100);
    grid.extend((0..36).map(|k| C::from_polar(1.0, 2.0 * PI * k as f64 / 36.0)));
    let res = subordinate_disk(phi, &grid, &SubordinationOptions::default())
        .map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (z, row) in grid.iter().zip(&res.rows) {
        let w = row
            .omega1_finite()
            .ok_or_else(|| format!("no value at {z}"))?;
        worst = worst.max((w - z / (2.0 - z)).norm());
    }
    let at_one = res.rows[100].omega1_finite().map(|w| (w - 1.0).norm());
    check(
        worst <= 1e-8,
        format!(
            "worst error {worst:.2e} on 136 points, |omega(1) - 1| = {:.2e}",
            at_one.unwrap_or(f64::NAN)
        ),
    )
}

fn halfplane_residual() -> Outcome {
    let pairs = [
        ("bernoulli", catalog::bernoulli()),
        (
            "semicircle",
            catalog::semicircle(1.0, 2001).map_err(|e| e.to_string())?,
        ),
    ];
    let grid: Vec<C> = (0..20)
        .flat_map(|i| {
            (0..20).map(move |j| c(-3.0 + 6.0 * i as f64 / 19.0, 0.05 + 3.0 * j as f64 / 19.0))
        })
        .collect();
    let mut detail = Vec::new();
    let mut ok = true;
    for (name, mu) in pairs {
        let conv = AdditiveConvolution::new(mu.clone(), mu.clone()).map_err(|e| e.to_string())?;
        let mut worst: f64 = 0.0;
        for &z in &grid {
            let row = conv.subordination(z, &dw());
            let (w1, w2) = match (row.omega1_finite(), row.omega2_finite()) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(format!("{name}: no value at {z}")),
            };
            let f1 = mu.cauchy_transform(w1).map_err(|e| e.to_string())?.inv();
            worst = worst.max((f1 - (w1 + w2 - z)).norm());
        }
        ok &= worst <= 1e-9;
        detail.push(format!("{name} {worst:.2e}"));
    }
    check(ok, format!("worst residual: {}", detail.join(", ")))
}

// roots of s^3 - x s + x = 0 with Im s < 0, density -Im(s)/(pi x), from a
// 40-digit polynomial root finder
#[allow(clippy::approx_constant)]
const MP_ORACLE: [(f64, f64); 3] = [
    (0.5, 0.318_309_886_183_790_7),
    (1.0, 0.178_979_127_488_028_46),
    (2.0, 0.093_860_482_572_163_84),
];

fn positive_line() -> Outcome {
    let d = |x| MeasureRep::point_mass(Support::PositiveLine, x, 1.0).unwrap();
    let grid = [0.5, 1.0, 2.0];
    let pm = free_mult_convolve_positive(&d(2.0), &d(3.5), &grid, &DEFAULT_EPS, &dw())
        .map_err(|e| e.to_string())?;
    let atom_ok = pm.atoms.len() == 1
        && (pm.atoms[0].0 - 7.0).abs() < 1e-12
        && (pm.atoms[0].1 - 1.0).abs() <= 1e-8;

    let mp = catalog::marchenko_pastur(1.0, 2001).map_err(|e| e.to_string())?;
    let two =
        catalog::two_point(Support::PositiveLine, 0.5, 2.0, 0.3).map_err(|e| e.to_string())?;
    let sub = Subordinator::positive_line(
        SelfMap::eta_ratio_measure(mp.clone()).map_err(|e| e.to_string())?,
        SelfMap::eta_ratio_measure(two).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let mut residual: f64 = 0.0;
    for z in [
        c(0.5, 0.5),
        c(-1.0, 0.2),
        c(3.0, 1.0),
        c(-0.2, 2.0),
        c(0.1, 0.05),
    ] {
        let row = sub.solve_point(Param::one(z), &dw());
        if row.error.is_some() || !row.residual.is_finite() {
            return Err(format!("subordination failed at {z}: {:?}", row.error));
        }
        residual = residual.max(row.residual);
    }
    let zero = sub.solve_point(Param::one(c(0.0, 0.0)), &dw());
    let inf = sub.solve_point(Param::infinity(), &dw());
    let ends_ok = zero.kind == RowKind::Exact
        && zero.omega1 == Some(SpherePoint::Finite(c(0.0, 0.0)))
        && inf.kind == RowKind::Exact
        && inf.omega1 == Some(SpherePoint::Infinity);

    let xs: Vec<f64> = MP_ORACLE.iter().map(|o| o.0).collect();
    let out = free_mult_convolve_positive(&mp, &mp, &xs, &DEFAULT_EPS, &dw())
        .map_err(|e| e.to_string())?;
    let mp_err = MP_ORACLE
        .iter()
        .zip(&out.density)
        .map(|(o, v)| (v - o.1).abs())
        .fold(0.0, f64::max);
    check(
        atom_ok && residual <= 1e-9 && ends_ok && mp_err <= 1e-4,
        format!(
            "point-mass atom {atom_ok}, residual {residual:.2e}, end rows exact {ends_ok}, MP density error {mp_err:.2e}"
        ),
    )
}

fn circle_mult() -> Outcome {
    let (a1, a2) = (c(0.5, 0.2), c(-0.3, 0.6));
    let k = |a: C| SelfMap::constant(DomainTag::Disk, SpherePoint::Finite(a)).unwrap();
    let conv = CircleConvolution::from_maps(k(a1), k(a2)).map_err(|e| e.to_string())?;
    let mut law: f64 = 0.0;
    for z in dw_core::selfmaps::sample_points(DomainTag::Disk, 50) {
        let e = conv.eta(z, &dw()).map_err(|e| e.to_string())?;
        law = law.max((e - a1 * a2 * z).norm());
    }
    let wc = catalog::wrapped_cauchy(a1, 801).map_err(|e| e.to_string())?;
    let haar = catalog::haar(401).map_err(|e| e.to_string())?;
    let zs = dw_core::selfmaps::sample_points(DomainTag::Disk, 20);
    let angles = linspace_step(-3.0, 3.0, 0.25);
    let out = free_mult_convolve_circle(&wc, &haar, &zs, &angles, &DEFAULT_EPS, &dw())
        .map_err(|e| e.to_string())?;
    let eta_dev = out
        .eta
        .iter()
        .map(|e| e.map_or(f64::INFINITY, |e| e.norm()))
        .fold(0.0, f64::max);
    let dens_dev = out
        .spectral
        .density
        .iter()
        .map(|d| (d - 1.0 / (2.0 * PI)).abs())
        .fold(0.0, f64::max);
    check(
        law <= 1e-10 && eta_dev <= 1e-12 && dens_dev <= 1e-12,
        format!("eta law error {law:.2e}, Haar eta {eta_dev:.2e}, Haar density {dens_dev:.2e}"),
    )
}

/// Data `(alpha, beta, sigma)` with an interior fixed point on the imaginary
/// axis: solve a random map, then move its fixed point `a + ib` to `ib` by
/// shifting `sigma` and reweighting it to keep the kernel's imaginary part.
fn nevanlinna_with_axis_point(rng: &mut ChaCha8Rng) -> Option<(NevanlinnaData, f64)> {
    let alpha = rng.gen_range(0.0..0.9);
    let atoms: Vec<(f64, f64)> = (0..3)
        .map(|_| (rng.gen_range(-3.0..3.0), rng.gen_range(0.2..1.5)))
        .collect();
    let sigma = |shift: f64, reweight: bool| {
        let at = atoms
            .iter()
            .map(|&(t, m)| {
                let s = t - shift;
                let w = if reweight {
                    m * (1.0 + t * t) / (1.0 + s * s)
                } else {
                    m
                };
                Atom::at(s, w)
            })
            .collect();
        MeasureRep::new(Support::RealLine, at, None).unwrap()
    };
    let beta = rng.gen_range(-1.0..1.0);
    let first = NevanlinnaData::new(alpha, beta, sigma(0.0, false)).ok()?;
    let r = solve(&SelfMap::nevanlinna(first), &dw()).ok()?;
    if r.case != DwCase::InteriorAttracting {
        return None;
    }
    let p = r.finite_point()?;
    let moved = NevanlinnaData::new(alpha, 0.0, sigma(p.re, true)).ok()?;
    let re = moved.eval(c(0.0, p.im)).ok()?.re;
    let data = NevanlinnaData::new(alpha, -re, moved.sigma).ok()?;
    let q = solve(&SelfMap::nevanlinna(data.clone()), &dw())
        .ok()?
        .finite_point()?;
    if q.re.abs() > 1e-9 {
        return None;
    }
    Some((data, q.im))
}

fn nevanlinna_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    let mut found = 0;
    for _ in 0..200 {
        if found == 10 {
            break;
        }
        let Some((data, y)) = nevanlinna_with_axis_point(&mut rng) else {
            continue;
        };
        let v = data.imag_identity(y).map_err(|e| e.to_string())?;
        worst = worst.max((v - 1.0).abs());
        found += 1;
    }
    check(
        found == 10 && worst <= 1e-8,
        format!("{found} maps, worst |identity - 1| = {worst:.2e}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("semicircle plus semicircle", semicircle_sum),
        ("bernoulli plus bernoulli", bernoulli_sum),
        ("point masses add", point_mass_sum),
        ("quadratic interior fixed points", quadratic_interior),
        ("affine family harness", harness),
        ("disk continuity", disk_continuity),
        ("half-plane residual", halfplane_residual),
        ("positive-line product", positive_line),
        ("circle product", circle_mult),
        ("nevanlinna identity", nevanlinna_identity),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(d) => println!("criterion {:>2} PASS  {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {d}", i + 1)
            }
        }
    }
    println!(
        "{} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
