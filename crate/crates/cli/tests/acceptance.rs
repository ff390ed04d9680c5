//! Acceptance suite over the desk-scale corpus at degree cap 10. Prints one
//! PASS/FAIL line per criterion and exits nonzero if any fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use crformal::input::{load_manifold, load_map, LoadedMap, NamedManifold};
use crformal::manifold::reality_defect;
use crformal::nondegeneracy::{self, FiniteOrder};
use crformal::parse::{parse_polynomial, token_map, Origin};
use crformal::reflection::{
    char_variety, determinant_d, normal_components, reflection_identities, reflection_map, reflection_vars,
    validate_cr_map,
};
use crformal::segre::{build_chains, decide_minimality, membership_residual, restriction_defect, MinimalityStatus};
use crformal::series::TruncatedSeries;

const CAP: u32 = 10;
const SEED: u64 = 1;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);
type Row = (&'static str, Option<FiniteOrder>, bool, Option<Option<usize>>, usize);

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn manifold(name: &str) -> NamedManifold {
    load_manifold(&corpus(&format!("{name}.mfd")), CAP).expect("corpus manifold loads")
}

fn all_manifolds() -> Vec<NamedManifold> {
    ["lewy", "quartic", "leviflat", "cylinder"].iter().map(|n| manifold(n)).collect()
}

fn map(name: &str) -> LoadedMap {
    load_map(&corpus(&format!("{name}.map")), CAP, None, None).expect("corpus map loads")
}

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err(e: crformal::error::Error) -> String {
    e.to_string()
}

fn reality() -> Outcome {
    for named in all_manifolds() {
        let m = &named.manifold;
        let defect = reality_defect(m.phi(), m.n(), m.cr_dim()).map_err(err)?;
        check(defect.iter().all(TruncatedSeries::is_zero), format!("{}: nonzero defect", named.name))?;
    }
    Ok("exact zero on all four manifolds".into())
}

fn membership() -> Outcome {
    for named in all_manifolds() {
        let m = &named.manifold;
        let b_max = 2 * (m.codim() + 1);
        let chains = build_chains(m, b_max + 1).map_err(err)?;
        for b in 0..=b_max {
            let r = membership_residual(m, &chains[b], &chains[b + 1]).map_err(err)?;
            check(r.iter().all(TruncatedSeries::is_zero), format!("{}: b = {b}", named.name))?;
        }
    }
    Ok("b <= 2(c+1) on all four manifolds".into())
}

fn minimality() -> Outcome {
    let expect = [
        ("lewy", MinimalityStatus::Minimal(2)),
        ("quartic", MinimalityStatus::Minimal(2)),
        ("leviflat", MinimalityStatus::NotMinimalAtCap),
        ("cylinder", MinimalityStatus::Minimal(2)),
    ];
    let mut seen = Vec::new();
    for (name, want) in expect {
        let m = manifold(name).manifold;
        let v = decide_minimality(&m, 2 * (m.codim() + 1), SEED).map_err(err)?;
        check(v.status == want, format!("{name}: {:?}, expected {want:?}", v.status))?;
        if name == "leviflat" {
            check(v.rank_trace.iter().all(|s| s.rank == 1), "leviflat: rank trace not constant 1")?;
        }
        seen.push(format!("{name} {:?}", v.status));
    }
    Ok(seen.join(", "))
}

fn restriction() -> Outcome {
    for named in all_manifolds() {
        let m = &named.manifold;
        let chains = build_chains(m, 4).map_err(err)?;
        for d in 0..=1 {
            let r = restriction_defect(m, &chains[d + 1], &chains[d + 3]).map_err(err)?;
            check(r.iter().all(TruncatedSeries::is_zero), format!("{}: d = {d}", named.name))?;
        }
    }
    Ok("d = 0, 1 on all four manifolds".into())
}

fn nondegeneracy_table() -> Outcome {
    // (name, finite order, holo-nondeg, Levi-type, d(M))
    let table: [Row; 4] = [
        ("lewy", Some(FiniteOrder::Order(1)), true, Some(Some(1)), 0),
        ("quartic", Some(FiniteOrder::NotUpToCap), true, Some(Some(1)), 0),
        ("leviflat", Some(FiniteOrder::NotUpToCap), false, None, 1),
        ("cylinder", None, false, None, 1),
    ];
    for (name, finite, holo, levi, d) in table {
        let m = manifold(name).manifold;
        let l = nondegeneracy::default_l_max(&m);
        let r = nondegeneracy::analyze(&m, nondegeneracy::default_k_max(&m), l).map_err(err)?;
        if let Some(f) = finite {
            check(r.finite.status == f, format!("{name}: finite order {:?}", r.finite.status))?;
        }
        check(r.holomorphic.holo_nondeg == holo, format!("{name}: holo-nondeg {}", r.holomorphic.holo_nondeg))?;
        if let Some(lt) = levi {
            check(r.holomorphic.levi_type == lt, format!("{name}: Levi-type {:?}", r.holomorphic.levi_type))?;
        }
        check(r.degeneracy.degeneracy == d, format!("{name}: d(M) = {}", r.degeneracy.degeneracy))?;
        check(r.cross_check_holo_vs_degeneracy, format!("{name}: holo-nondeg and d(M) = 0 disagree"))?;
    }
    Ok("table matches; holo-nondeg <=> d(M) = 0 on all four".into())
}

fn reflection_identities_check() -> Outcome {
    for (name, d_expected) in [("identity_lewy", "1"), ("dilation_lewy", "2")] {
        let lm = map(name);
        let (m, m2, f) = (&lm.source.manifold, &lm.target.manifold, &lm.map);
        check(validate_cr_map(f, m, m2).map_err(err)?.valid, format!("{name}: not CR"))?;
        let det = determinant_d(f, m).map_err(err)?;
        check(det.d.to_string() == d_expected, format!("{name}: D = {}", det.d))?;
        check(det.nonvanishing_on_m(), format!("{name}: D vanishes on the complexification"))?;
        for id in reflection_identities(f, m, m2, 2).map_err(err)? {
            check(id.holds(), format!("{name}: residual at alpha {:?}", id.alpha))?;
        }
    }
    Ok("|alpha| <= 2 residuals zero, D = 1 and D = 2".into())
}

fn reflection_mapping() -> Outcome {
    let lm = map("dilation_lewy");
    let (m2, f) = (&lm.target.manifold, &lm.map);
    let refl = reflection_map(f, m2).map_err(err)?;
    let rv = reflection_vars(f.n_src(), m2.cr_dim());
    let want = parse_polynomial("4*z2 - 4*i*theta1*z1", &rv, &token_map(&rv), Origin::default()).map_err(err)?;
    check((&refl[0] - &want).is_zero(), format!("reflection map {}", refl[0]))?;
    let nc = normal_components(f, m2).map_err(err)?;
    check(nc.matches(), "theta = 0 slice differs from f*")?;
    Ok(format!("{} ; slice {}", refl[0], nc.slice[0]))
}

fn characteristic_variety() -> Outcome {
    let id = map("identity_lewy");
    let cv = char_variety(&id.map, &id.source.manifold, &id.target.manifold, 1).map_err(err)?;
    check(cv.zero_dim_certified, "identity map not certified at jet order 1")?;
    let zero = map("zero_leviflat");
    for k in [1, (CAP - 2) as usize] {
        let cv = char_variety(&zero.map, &zero.source.manifold, &zero.target.manifold, k).map_err(err)?;
        check(!cv.zero_dim_certified, format!("constant map certified at jet order {k}"))?;
    }
    Ok("identity certified at k = 1, constant map not certified".into())
}

fn certificate() -> Outcome {
    let m = manifold("cylinder").manifold;
    let l = nondegeneracy::default_l_max(&m);
    let deg = nondegeneracy::degeneracy(&m, l).map_err(err)?;
    let cert = nondegeneracy::certificate_family(&m, &deg).map_err(err)?;
    check(cert.len() == 2, format!("family of size {}", cert.len()))?;
    let funcs: Vec<TruncatedSeries> = cert.iter().map(|c| c.function.clone()).collect();
    let jac = crformal::matrix::SeriesMatrix::full_jacobian(&funcs).map_err(err)?;
    let rank = crformal::matrix::generic_rank(&jac);
    check(rank == 2 && rank == m.n() - deg.degeneracy, format!("recomputed rank {rank}"))?;
    let names: Vec<String> = funcs.iter().map(|f| f.to_string()).collect();
    Ok(format!("{{{}}}, rank 2 = n - d(M)", names.join(", ")))
}

fn run_binary(args: &[&str]) -> Result<(Vec<u8>, Duration), String> {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_analyze"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    if !out.status.success() {
        return Err(format!("{args:?} exited with {}", out.status));
    }
    Ok((out.stdout, elapsed))
}

fn determinism() -> Outcome {
    let seed = SEED.to_string();
    let deg = CAP.to_string();
    let mut runs = Vec::new();
    for f in ["lewy.mfd", "quartic.mfd", "leviflat.mfd", "cylinder.mfd"] {
        runs.push(vec!["manifold".to_string(), corpus(f).display().to_string()]);
    }
    for f in ["identity_lewy.map", "dilation_lewy.map", "perturbed_lewy.map", "zero_leviflat.map"] {
        runs.push(vec!["map".to_string(), corpus(f).display().to_string()]);
    }
    let mut slowest = Duration::ZERO;
    for mut args in runs {
        args.extend(["--degree".into(), deg.clone(), "--seed".into(), seed.clone()]);
        let a: Vec<&str> = args.iter().map(String::as_str).collect();
        let (first, t1) = run_binary(&a)?;
        let (second, t2) = run_binary(&a)?;
        check(first == second, format!("{} differs between runs", a[1]))?;
        slowest = slowest.max(t1).max(t2);
    }
    check(slowest < Duration::from_secs(60), format!("slowest run took {slowest:?}"))?;
    Ok(format!("8 reports byte-identical across two runs; slowest run {:.2}s", slowest.as_secs_f64()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("reality identity", reality),
        ("Segre membership", membership),
        ("minimality verdicts", minimality),
        ("Segre-chain restriction identity", restriction),
        ("nondegeneracy table", nondegeneracy_table),
        ("reflection identities", reflection_identities_check),
        ("reflection mapping", reflection_mapping),
        ("characteristic variety", characteristic_variety),
        ("certificate family", certificate),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
