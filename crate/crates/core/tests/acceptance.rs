//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num::Zero;
use opnerve::bv::{check_d_squared, hc_colorings, nerve_bv_roundtrip, BVOperad};
use opnerve::doldkan::*;
use opnerve::fixtures;
use opnerve::hops::SuHomotopyOperad;
use opnerve::nerve::*;
use opnerve::operads::DgColoredOperad;
use opnerve::trees::trees_up_to;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn bv_d_squared() -> Outcome {
    let trees = trees_up_to(5, 3);
    for t in &trees {
        let r = check_d_squared(&BVOperad::build(t));
        ensure(r.passed(), || {
            format!("{}: {}", t.planar_encoding(), r.to_json())
        })?;
    }
    Ok(format!("{} trees", trees.len()))
}

fn hc_matches_nerve() -> Outcome {
    let mut g = rng(21);
    let mut targets = vec![("End".to_string(), fixtures::endomorphism())];
    for (s, t) in fixtures::trees() {
        targets.push((format!("K{s}"), DgColoredOperad::tree_operad(&t)));
    }
    let (mut trees, mut samples, mut accepted) = (0, 0, 0);
    for (name, p) in &targets {
        for t in trees_up_to(4, 3) {
            let colorings = hc_colorings(p, &t);
            if colorings.is_empty() {
                continue;
            }
            let per = 100usize.div_ceil(colorings.len());
            let mut tested = 0;
            for colors in &colorings {
                let r =
                    nerve_bv_roundtrip(p, &t, colors, per, &mut g).map_err(|e| e.to_string())?;
                ensure(r.report.passed(), || {
                    format!("{name} on {}: {}", t.planar_encoding(), r.report.to_json())
                })?;
                tested += r.tested;
                accepted += r.accepted;
            }
            ensure(tested >= 100, || {
                format!("{name} on {}: {tested} samples", t.planar_encoding())
            })?;
            trees += 1;
            samples += tested;
        }
    }
    Ok(format!(
        "{trees} (operad, tree) pairs, {samples} assignments, {accepted} dendrices"
    ))
}

fn horns_fill() -> Outcome {
    let mut g = rng(22);
    let (mut total, mut nonzero) = (0, 0);
    let end = SuHomotopyOperad::from_dg(&fixtures::endomorphism()).with_vertex_bound(4);
    for p in [fixtures::a_infinity(), end] {
        for t in trees_up_to(4, p.max_arity()) {
            for e in t.inner_edges() {
                for colors in colorings(&p, &t).into_iter().take(2) {
                    let x = random_dendrex(&p, &t, &colors, &mut g).map_err(|e| e.to_string())?;
                    let h = restrict_to_horn(&x, e).map_err(|e| e.to_string())?;
                    let f = fill_inner_horn(&p, &h).map_err(|e| e.to_string())?;
                    let r = check_dendrex(&p, &f).map_err(|e| e.to_string())?;
                    ensure(r.passed(), || {
                        format!("{}: {}", t.planar_encoding(), r.to_json())
                    })?;
                    ensure(restrict_to_horn(&f, e).ok() == Some(h.clone()), || {
                        format!("{}: filler does not extend the horn", t.planar_encoding())
                    })?;
                    if f.elements[&horn_gaps(&t, e).1].iter().any(|c| !c.is_zero()) {
                        nonzero += 1;
                    }
                    total += 1;
                }
            }
        }
    }
    ensure(total >= 50, || format!("only {total} horns"))?;
    Ok(format!(
        "{total} horns, {nonzero} with a nonzero missing face"
    ))
}

fn normalized_is_tr() -> Outcome {
    let mut n = 0;
    for (name, p) in fixtures::operads() {
        for prof in p.all_profiles() {
            let r = normalized_vs_tr(&p, &prof, 4).map_err(|e| e.to_string())?;
            ensure(r.passed(), || format!("{name} {prof}: {}", r.to_json()))?;
            n += 1;
        }
    }
    Ok(format!("{n} profiles at level 4"))
}

fn pi0_is_h0() -> Outcome {
    let mut n = 0;
    for (name, p) in fixtures::operads() {
        let profiles = p.all_profiles();
        let r = h0_nerve_comparison(&p, &profiles).map_err(|e| e.to_string())?;
        ensure(r.passed(), || format!("{name}: {}", r.to_json()))?;
        n += profiles.len();
    }
    Ok(format!("{n} profiles"))
}

fn dold_kan() -> Outcome {
    let mut g = rng(26);
    for i in 0..50 {
        let v = random_complex(&mut g, 0, 3, 4).map_err(|e| e.to_string())?;
        let r = n_gamma_identity(&v, 4).map_err(|e| e.to_string())?;
        ensure(r.passed(), || format!("NΓ instance {i}: {}", r.to_json()))?;
    }
    for i in 0..50 {
        let v = random_complex(&mut g, 0, 3, 3).map_err(|e| e.to_string())?;
        let x = gamma(&v, 3).map_err(|e| e.to_string())?.module;
        let x = x
            .conjugate(&random_base_change(&mut g, &x.dims))
            .map_err(|e| e.to_string())?;
        let r = gamma_n_iso(&x).map_err(|e| e.to_string())?;
        ensure(r.passed(), || format!("ΓN instance {i}: {}", r.to_json()))?;
    }
    let pairs = [
        (Shape::Simplex(1), Shape::Simplex(1)),
        (Shape::Simplex(2), Shape::Simplex(1)),
        (Shape::Cube(1), Shape::Cube(2)),
        (Shape::Simplex(2), Shape::Simplex(2)),
    ];
    for (a, b) in pairs {
        let r = ez_and_aw(&a, &b, 4);
        ensure(r.passed(), || format!("{a:?} × {b:?}: {}", r.to_json()))?;
    }
    Ok("50 + 50 instances, 4 products".into())
}

fn b_after_a() -> Outcome {
    let r = check_a_and_b(4, 3).map_err(|e| e.to_string())?;
    ensure(r.passed(), || r.to_json())?;
    Ok(format!("{} checks", r.checks.len()))
}

fn mapping_space_homology() -> Outcome {
    let mut g = rng(28);
    let c = Comparison::new(4).map_err(|e| e.to_string())?;
    for i in 0..20 {
        let v = random_complex(&mut g, 0, 3, 4).map_err(|e| e.to_string())?;
        let r = c.run(&v).map_err(|e| e.to_string())?;
        ensure(r.passed(), || format!("instance {i}: {}", r.to_json()))?;
    }
    Ok("20 complexes at level 4".into())
}

fn predicates() -> Outcome {
    let sets = [
        ("WE+", fixtures::we_positive(), true, true),
        ("WE-", fixtures::we_negative(), true, false),
        ("fib+", fixtures::fib_positive(), false, true),
        ("fib-", fixtures::fib_negative(), false, false),
    ];
    let mut counts = Vec::new();
    for (label, set, we, want) in sets {
        ensure(set.len() >= 5, || format!("{label}: only {}", set.len()))?;
        for (name, f) in &set {
            let v = if we {
                is_weak_equivalence(f)
            } else {
                is_fibration(f)
            }
            .map_err(|e| e.to_string())?;
            ensure(v.holds == want, || {
                format!("{label} {name}: {}", v.report.to_json())
            })?;
            if !want {
                let w = v.report.first_failure().and_then(|c| c.witness.clone());
                ensure(w.is_some(), || format!("{label} {name}: no witness"))?;
            }
        }
        counts.push(format!("{label} {}", set.len()));
    }
    Ok(counts.join(", "))
}

fn truncation() -> Outcome {
    let p = SuHomotopyOperad::from_dg(&fixtures::padded()).with_vertex_bound(4);
    let r = nerve_tr_equality(&p, 4, 2, &mut rng(30)).map_err(|e| e.to_string())?;
    ensure(r.passed(), || r.to_json())?;
    Ok(format!(
        "padded fixture, trees up to 4 vertices, {} systems",
        r.bounds["systems"]
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("bv d² = 0", bv_d_squared),
        ("hcN ≅ N", hc_matches_nerve),
        ("inner horns fill", horns_fill),
        ("N(P^L) ≅ tr P", normalized_is_tr),
        ("π₀ = H₀", pi0_is_h0),
        ("Dold–Kan", dold_kan),
        ("b∘a = id", b_after_a),
        ("mapping spaces", mapping_space_homology),
        ("WE and fibration predicates", predicates),
        ("N ∘ tr = N", truncation),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panic: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({detail}; {secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
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
