//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use special_generic::analyze::{collar_identity_residual, fiber_at, sample_manifold, FiberClass};
use special_generic::construct::{build_basic, build_basic_unchecked, choose_t, validate_vertical_spec};
use special_generic::mesh::{extract_isosurface, split_components, summarize};
use special_generic::pipeline::{mesh_stage, verify, write_document, Job, Overrides, PipelineReport, Verdict};
use special_generic::polynomial::MultiPoly;
use special_generic::reeb::poincare_reeb;
use special_generic::region::PointClass;
use special_generic::shapes;

type Outcome = Result<String, String>;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn check(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn job(name: &str) -> Job {
    Job::load(&configs().join(name), &Overrides::default()).expect("config loads")
}

/// Runs `sgm full` and returns the exit code, stderr and parsed report.
fn run_full(config: &str, out: &Path) -> (Option<i32>, String, Option<PipelineReport>) {
    let o = Command::new(env!("CARGO_BIN_EXE_sgm"))
        .args(["full", "--no-timestamp", "--config"])
        .arg(configs().join(config))
        .arg("--out")
        .arg(out)
        .output()
        .expect("sgm runs");
    let report = std::fs::read_to_string(out.join("report.json"))
        .ok()
        .and_then(|t| serde_json::from_str(&t).ok());
    (o.status.code(), String::from_utf8_lossy(&o.stderr).into_owned(), report)
}

fn sphere_recovery() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let (code, err, rep) = run_full("disk.json", dir.path());
    let secs = start.elapsed().as_secs_f64();
    check(code == Some(0), format!("exit {code:?}: {err}"))?;
    let rep = rep.ok_or("no report")?;
    let mesh = rep.mesh.ok_or("no mesh stage")?;
    let ns = rep.nonsingular.ok_or("no nonsingular stage")?;
    let fibers = rep.fibers.ok_or("no fiber stage")?;
    check(job("disk.json").mesh_res == 96, "disk config is not at mesh res 96")?;
    check(mesh.summary.euler == 2, format!("euler {}", mesh.summary.euler))?;
    check(mesh.summary.components == 1, format!("components {}", mesh.summary.components))?;
    check(ns.passed && ns.min_grad_norm >= 1.0, format!("min |grad P| {}", ns.min_grad_norm))?;
    check(fibers.passed, format!("{} fiber failures", fibers.failures.len()))?;
    check(secs < 10.0, format!("took {secs:.2} s"))?;
    Ok(format!(
        "euler 2, 1 component, min |grad P| {:.4}, {} fibers, {secs:.2} s",
        ns.min_grad_norm,
        fibers.interior_checked + fibers.boundary_checked
    ))
}

fn doubling_identity() -> Outcome {
    let start = Instant::now();
    let mut eulers = Vec::new();
    for (name, region, expect) in [
        ("disk", shapes::disk(), 2),
        ("annulus", shapes::annulus(), 0),
        ("two-holed disk", shapes::two_holed_disk(), -2),
    ] {
        let chi = region.region_euler().map_err(|e| e.to_string())?;
        check(2 * chi == expect, format!("{name}: region euler {chi}"))?;
        let h = build_basic(&region, 1).map_err(|e| e.to_string())?;
        for res in [64, 65] {
            let (_, st) = mesh_stage(&h, res).map_err(|e| format!("{name}: {e}"))?;
            check(
                st.summary.euler == expect && st.summary.components == 1,
                format!("{name} at res {res}: euler {} components {}", st.summary.euler, st.summary.components),
            )?;
        }
        eulers.push(expect);
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 60.0, format!("took {secs:.2} s"))?;
    Ok(format!("euler {eulers:?} at res 64 and 65, {secs:.2} s"))
}

fn interval_case() -> Outcome {
    let h = build_basic(&shapes::interval(), 2).map_err(|e| e.to_string())?;
    let m = extract_isosurface(h.poly(), &h.bbox(), 64).map_err(|e| e.to_string())?;
    let s = summarize(&m).map_err(|e| e.to_string())?;
    check(s.euler == 2 && s.components == 1, format!("interval: euler {} components {}", s.euler, s.components))?;
    let h = build_basic(&shapes::two_intervals(), 2).map_err(|e| e.to_string())?;
    let m = extract_isosurface(h.poly(), &h.bbox(), 64).map_err(|e| e.to_string())?;
    let parts = split_components(&m);
    check(parts.len() == 2, format!("two intervals: {} components", parts.len()))?;
    for p in &parts {
        let s = summarize(p).map_err(|e| e.to_string())?;
        check(s.euler == 2, format!("two intervals: component euler {}", s.euler))?;
    }
    Ok("interval euler 2; two intervals give 2 spheres".into())
}

fn generalized_construction() -> Outcome {
    let j = job("example3.json");
    let spec = j.vertical.as_ref().ok_or("example3 has no vertical spec")?;
    let v = validate_vertical_spec(spec, spec.k());
    check(v.first_failure().is_none(), format!("validation: {:?}", v.first_failure()))?;
    let h = j.build().map_err(|e| e.to_string())?;
    let rep = verify(&h, j.samples, j.seed).map_err(|e| e.to_string())?;
    check(rep.fibers.passed, format!("{} fiber failures", rep.fibers.failures.len()))?;
    let r = h.region();
    let mut interior = 0;
    for i in 0..9 {
        for jj in 0..9 {
            let x = [-0.9 + 0.225 * i as f64, -0.9 + 0.225 * jj as f64];
            if r.classify(&x).map_err(|e| e.to_string())? == PointClass::Interior {
                let f = fiber_at(&h, &x).map_err(|e| e.to_string())?;
                check(
                    f.classification == FiberClass::Circle && f.components == 1 && f.euler_char == Some(0),
                    format!("fiber at {x:?}: {:?}", f.classification),
                )?;
                interior += 1;
            }
        }
    }
    let boundary = r.boundary_samples(64);
    for x in &boundary {
        let f = fiber_at(&h, x).map_err(|e| e.to_string())?;
        check(f.classification == FiberClass::Point, format!("boundary fiber at {x:?}: {:?}", f.classification))?;
    }
    let d = rep.singular_set.hausdorff_to_boundary;
    check(rep.singular_set.passed && d < 1e-5, format!("hausdorff {d:e}"))?;
    Ok(format!(
        "{interior} interior circles, {} boundary points, hausdorff {d:.2e}",
        boundary.len()
    ))
}

fn t_choice() -> Outcome {
    let r = shapes::annulus();
    let t = choose_t(&r, 1.0).map_err(|e| e.to_string())?;
    check((0.26..=0.30).contains(&t), format!("T = {t}"))?;
    let ratio = r.grid_max_product(512) / t;
    check(ratio <= 0.5, format!("max(prod f / T) = {ratio} on 512^2"))?;
    Ok(format!("T = {t:.6}, max(prod f / T) on 512^2 = {ratio:.6}"))
}

fn poincare_reeb_graphs() -> Outcome {
    let mut shapes_seen = Vec::new();
    for (name, region, expect, events) in [
        ("disk", shapes::disk(), Some((2, 1, 0)), vec![-1.0, 1.0]),
        ("annulus", shapes::annulus(), Some((4, 4, 1)), vec![-1.0, -0.5, 0.5, 1.0]),
        ("two-holed disk", shapes::two_holed_disk(), None, vec![]),
    ] {
        let g = poincare_reeb(&region, 512).map_err(|e| format!("{name}: {e}"))?;
        let shape = g.shape();
        if let Some(e) = expect {
            check(shape == e, format!("{name}: {shape:?}"))?;
        }
        let chi = region.region_euler().map_err(|e| e.to_string())?;
        check(g.betti1 == 1 - chi, format!("{name}: betti1 {} vs 1 - euler {}", g.betti1, 1 - chi))?;
        check(
            g.vertices.iter().all(|v| v.degree == 1 || v.degree == 3),
            format!("{name}: vertex degree outside {{1, 3}}"),
        )?;
        let mut xs: Vec<f64> = g.vertices.iter().map(|v| v.x).collect();
        xs.sort_by(f64::total_cmp);
        if !events.is_empty() {
            check(xs.len() == events.len(), format!("{name}: events {xs:?}"))?;
            for (x, e) in xs.iter().zip(&events) {
                check((x - e).abs() <= 1e-6, format!("{name}: event {x} vs {e}"))?;
            }
        }
        shapes_seen.push(shape);
    }
    check(shapes_seen[2].2 == 2, format!("two-holed disk betti1 {}", shapes_seen[2].2))?;
    Ok(format!("(V, E, b1) = {:?}", shapes_seen))
}

fn collar_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for name in ["disk.json", "annulus.json", "two_holed.json", "interval.json", "two_intervals.json", "annulus_k2.json", "example3.json", "quartic.json"] {
        let j = job(name);
        let h = j.build().map_err(|e| format!("{name}: {e}"))?;
        let s = sample_manifold(&h, 512, j.seed).map_err(|e| format!("{name}: {e}"))?;
        check(s.len() >= 250, format!("{name}: {} samples", s.len()))?;
        let r = collar_identity_residual(&h, &s);
        check(r <= 1e-8, format!("{name}: residual {r:e}"))?;
        worst = worst.max(r);
    }
    Ok(format!("max residual {worst:.2e} over 8 constructions"))
}

fn negative_controls() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let h = build_basic_unchecked(&shapes::duplicated_disk(), 1).map_err(|e| e.to_string())?;
    let doc = dir.path().join("duplicated.json");
    write_document(&doc, &h).map_err(|e| e.to_string())?;
    let cases: [(&str, Vec<String>); 3] = [
        ("nonsingular", vec!["verify".into(), "--hypersurface".into(), doc.display().to_string()]),
        ("certify", vec!["full".into(), "--config".into(), configs().join("swapped_annulus.json").display().to_string()]),
        ("validate", vec!["full".into(), "--config".into(), configs().join("f0_squared.json").display().to_string()]),
    ];
    for (stage, args) in cases {
        let o = Command::new(env!("CARGO_BIN_EXE_sgm"))
            .args(&args)
            .arg("--out")
            .arg(dir.path().join(stage))
            .output()
            .map_err(|e| e.to_string())?;
        let err = String::from_utf8_lossy(&o.stderr);
        check(o.status.code() == Some(1), format!("{stage}: exit {:?}", o.status.code()))?;
        check(err.contains(&format!("FAILED at stage {stage}")), format!("{stage}: stderr {err}"))?;
    }
    let f0sq = job("f0_squared.json");
    let v = validate_vertical_spec(f0sq.vertical.as_ref().ok_or("no spec")?, 1);
    check(v.first_failure().map(|f| f.condition) == Some(2), format!("f0 = t^2 fails {:?}", v.first_failure()))?;
    Ok("nonsingular, certify and validate each fail with exit 1".into())
}

fn random_poly(rng: &mut ChaCha8Rng, nvars: usize) -> MultiPoly {
    let mut terms = Vec::new();
    for _ in 0..8 {
        let exps: Vec<u32> = (0..nvars).map(|_| rng.gen_range(0..3)).collect();
        if exps.iter().sum::<u32>() <= 3 && exps.iter().all(|&e| e < 3) {
            terms.push((exps, rng.gen_range(-2.0..2.0)));
        }
    }
    for v in 0..nvars {
        let mut exps = vec![0; nvars];
        exps[v] = 3;
        let c: f64 = rng.gen_range(0.5..2.0);
        terms.push((exps, if rng.gen_bool(0.5) { c } else { -c }));
    }
    MultiPoly::from_terms(nvars, terms).expect("valid terms")
}

fn numeric_hygiene() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (h1, h2) = (1e-3, 1e-4);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..100 {
        let p = random_poly(&mut rng, 3);
        let grad = p.gradient();
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for (v, g) in grad.iter().enumerate() {
            let exact = g.eval(&x).map_err(|e| e.to_string())?;
            let err = |h: f64| {
                let mut a = x.clone();
                let mut b = x.clone();
                a[v] += h;
                b[v] -= h;
                let fd = (p.eval_unchecked(&a) - p.eval_unchecked(&b)) / (2.0 * h);
                (fd - exact).abs()
            };
            let order = (err(h1) / err(h2)).log10() / (h1 / h2).log10();
            check((1.9..=2.1).contains(&order), format!("polynomial {i}, variable {v}: order {order}"))?;
            lo = lo.min(order);
            hi = hi.max(order);
        }
    }
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = 0;
    for config in ["disk.json", "example3.json"] {
        for d in [&a, &b] {
            let (code, err, rep) = run_full(config, &d.path().join(config));
            check(code == Some(0), format!("{config}: exit {code:?}: {err}"))?;
            check(
                rep.map(|r| r.verdict) == Some(Verdict::SpecialGenericVerified),
                format!("{config}: not verified"),
            )?;
        }
        let da = a.path().join(config);
        let mut names: Vec<_> = std::fs::read_dir(&da)
            .map_err(|e| e.to_string())?
            .map(|e| e.map(|e| e.file_name()))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        names.sort();
        for n in names {
            let x = std::fs::read(da.join(&n)).map_err(|e| e.to_string())?;
            let y = std::fs::read(b.path().join(config).join(&n)).map_err(|e| e.to_string())?;
            check(x == y, format!("{config}: {} differs", n.to_string_lossy()))?;
            files += 1;
        }
    }
    Ok(format!("finite-difference order in [{lo:.4}, {hi:.4}] over 300 partials; {files} documents identical"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("sphere recovery", sphere_recovery),
        ("doubling identity", doubling_identity),
        ("interval case", interval_case),
        ("generalized construction", generalized_construction),
        ("T choice", t_choice),
        ("Poincare-Reeb graphs", poincare_reeb_graphs),
        ("collar identity", collar_identity),
        ("negative controls", negative_controls),
        ("numeric hygiene", numeric_hygiene),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
