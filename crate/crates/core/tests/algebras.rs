//! Algebra construction, validation and the on-disk format, including an
//! algebra (so(5)) that does not come from the builders.

mod common;

use std::sync::Arc;

use twotoda::algebra::io::{load_spec, parse_spec, save_spec, spec_to_string};
use twotoda::algebra::{build_gl, build_sl, SpecParts};
use twotoda::checks::{self, expected_cardinality, expected_rank, CheckConfig, CheckId};
use twotoda::invariants::family_cardinality;
use twotoda::{AlgebraSpec, Error, Region};

fn violations(parts: SpecParts) -> Vec<&'static str> {
    match AlgebraSpec::from_parts(parts) {
        Err(Error::Invariant(v)) => v.iter().map(|v| v.invariant).collect(),
        Err(e) => panic!("unexpected error {e}"),
        Ok(_) => vec![],
    }
}

#[test]
fn so5_is_a_valid_graded_algebra() {
    let s = common::so5();
    assert_eq!(s.dim(), 10);
    assert_eq!(s.rank(), 2);
    assert_eq!(s.simple_root_count(), 2);
    assert!(s.validate().is_empty());
    assert_eq!(s.indices_in(Region::Exactly(0)).len(), 2);
    assert_eq!(s.indices_in(Region::Exactly(3)).len(), 1);
    assert_eq!(family_cardinality(&s), 8);
    assert_eq!(expected_cardinality(&s), 8);
    assert_eq!(expected_rank(&s), 12);
}

#[test]
fn so5_numeric_cartan_is_b2() {
    let c = twotoda::toda::numeric_cartan(&common::so5()).unwrap();
    let rounded: Vec<i64> = c.iter().map(|v| v.round() as i64).collect();
    // Column-major [[2, -2], [-1, 2]] or its transpose, depending on the
    // order of the simple roots.
    assert!(rounded == vec![2, -1, -2, 2] || rounded == vec![2, -2, -1, 2], "{c}");
    assert!(c.iter().all(|v| (v - v.round()).abs() < 1e-12));
}

#[test]
fn so5_round_trips_through_the_file_format() {
    let s = common::so5();
    let text = spec_to_string(&s);
    let back = parse_spec(&text).unwrap();
    assert_eq!(back, *s);
    assert_eq!(spec_to_string(&back), text);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("so5.spec");
    save_spec(&s, &path).unwrap();
    assert_eq!(load_spec(&path).unwrap(), *s);
}

#[test]
fn so5_passes_the_whole_suite() {
    let s = common::so5();
    let reports = checks::run(CheckId::All, &s, &CheckConfig::default()).unwrap();
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed()).map(|r| r.to_string()).collect();
    assert!(failed.is_empty(), "{failed:#?}");
    assert!(reports.iter().all(|r| r.is_consistent()));
}

#[test]
fn corrupted_specs_name_the_broken_invariant() {
    let mut p = common::so5_parts();
    p.degrees[0] += 1;
    assert!(violations(p).contains(&"grading"));

    let mut p = common::so5_parts();
    p.exponents = vec![1, 2];
    assert!(violations(p).contains(&"exponents"));

    let mut p = common::so5_parts();
    p.h_coords.iter_mut().for_each(|c| *c *= 2.0);
    assert!(violations(p).contains(&"principal-pair"));

    let mut p = common::so5_parts();
    p.cartan = vec![vec![2]];
    assert!(violations(p).contains(&"cartan-shape"));

    let mut p = common::so5_parts();
    p.associative = true;
    assert!(violations(p).contains(&"associativity"));

    let mut p = common::so5_parts();
    p.rank = 3;
    assert!(violations(p).contains(&"rank"));

    let mut p = common::so5_parts();
    p.basis[1] = p.basis[0].clone();
    assert!(violations(p).contains(&"basis-independence"));
}

#[test]
fn builder_invariants() {
    for n in 2..=5 {
        let sl = build_sl(n).unwrap();
        assert_eq!(sl.dim(), n * n - 1);
        assert_eq!(expected_rank(&sl), sl.dim() + sl.rank());
        assert_eq!(expected_cardinality(&sl), (sl.dim() + 3 * sl.rank()) / 2);
        let gl = build_gl(n).unwrap();
        assert_eq!(gl.dim(), n * n);
        assert_eq!(expected_rank(&gl), n * n + n - 2);
        assert_eq!(expected_cardinality(&gl), n * (n + 3) / 2);
        assert!(sl.validate().is_empty() && gl.validate().is_empty());
    }
    assert!(matches!(build_sl(1), Err(Error::InvalidOrder(1))));
    assert!(matches!(build_gl(0), Err(Error::InvalidOrder(0))));
}

#[test]
fn form_scale_leaves_ranks_and_verdicts_unchanged() {
    for spec in [common::sl(3), common::gl(2), common::so5()] {
        let scaled = Arc::new(spec.with_form_scale(2.0).unwrap());
        let cfg = CheckConfig { samples: 6, ..CheckConfig::default() };
        for id in [CheckId::Rank, CheckId::Independence, CheckId::Involutivity, CheckId::Casimir, CheckId::Toda] {
            let a = checks::run(id, &spec, &cfg).unwrap();
            let b = checks::run(id, &scaled, &cfg).unwrap();
            assert_eq!(a.len(), b.len());
            for (ra, rb) in a.iter().zip(&b) {
                assert_eq!(ra.verdict, rb.verdict, "{ra} / {rb}");
                if ra.tolerance.is_none() {
                    assert_eq!(ra.measured, rb.measured, "{ra} / {rb}");
                }
            }
        }
    }
    assert!(common::sl(2).with_form_scale(0.0).is_err());
}
