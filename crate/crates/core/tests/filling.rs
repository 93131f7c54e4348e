use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use solvfill_core::filling::assemble::{
    backtrack_fill, bounded_fill, cone_fill, free_fill, gromov_fill, rectangle_fill, shear_fill, tame_triangle_fill,
    DEFAULT_BOUNDED_RADIUS,
};
use solvfill_core::filling::chain::TameCtx;
use solvfill_core::filling::estimate::{grid_max, lipschitz_estimate, Schedule};
use solvfill_core::filling::map::{edge_deviation, Edge, SquareMap};
use solvfill_core::filling::path::{word_path, Path1D, SlotPath};
use solvfill_core::filling::probe::{random_triple, relation_word};
use solvfill_core::io::word_spec::parse_letters;
use solvfill_core::presets::load_preset;
use solvfill_core::words::{Factor, Letter, NormalForms, Word};
use solvfill_core::{GroupF, SolvableGroup};
use std::sync::Arc;

fn group(name: &str) -> SolvableGroup {
    SolvableGroup::new(load_preset(name).unwrap()).unwrap()
}

const TOL: f64 = 1e-6;

/// Bottom traces `bottom`, the other three edges stay at the base point.
fn assert_disk(g: &SolvableGroup, f: &SquareMap, bottom: &dyn Fn(f64) -> GroupF) {
    let base = bottom(0.0);
    let at_base = |_: f64| base.clone();
    assert!(edge_deviation(g, f, Edge::Bottom, bottom, 512) < TOL, "bottom");
    for e in [Edge::Top, Edge::Left, Edge::Right] {
        let d = edge_deviation(g, f, e, &at_base, 512);
        assert!(d < TOL, "{e:?} deviates by {d}");
    }
}

fn letters(g: &SolvableGroup, s: &str) -> Word {
    parse_letters(g, s).unwrap()
}

#[test]
fn backtrack_fill_bounds_the_doubled_word() {
    let g = group("heisenberg-tame");
    let v = letters(&g, "u:1,0,0 a:1 u:0,1/2,0 a:-1 u:0,0,1");
    let full = v.concat(&v.inverse(&g).unwrap());
    let p = word_path(&g, g.identity_f64(), &full);
    let f = backtrack_fill(&g, g.identity_f64(), &v).unwrap();
    assert_disk(&g, &f, &|t| p.eval(&g, t));
    let est = lipschitz_estimate(&g, &f, 256);
    assert!(est.raw <= 1.05 * p.lipschitz(), "{} vs {}", est.raw, p.lipschitz());
}

#[test]
fn shear_fill_slides_the_word() {
    let g = group("sol");
    let v = letters(&g, "u:1,0 a:1 u:0,1");
    let f = shear_fill(&g, g.identity_f64(), &v, 3);
    let slots = |pad_front: bool| {
        let mut s: Vec<Option<Letter>> = v.letters.iter().cloned().map(Some).collect();
        if pad_front {
            s.splice(0..0, vec![None; 3]);
        } else {
            s.extend(vec![None; 3]);
        }
        SlotPath::from_letters(&g, g.identity_f64(), &s)
    };
    let (bottom, top) = (slots(true), slots(false));
    assert!(edge_deviation(&g, &f, Edge::Bottom, &|t| bottom.eval(&g, t), 256) < TOL);
    assert!(edge_deviation(&g, &f, Edge::Top, &|t| top.eval(&g, t), 256) < TOL);
}

#[test]
fn cone_fill_in_the_abelian_group() {
    let g = group("abelian3-rank2");
    let lp = Path1D::Circle {
        base: g.identity_f64(),
        radius: 2.0,
        plane: (0, 1),
    };
    let c = cone_fill(&g, lp.clone(), g.identity_f64(), 1e6).unwrap();
    assert_disk(&g, &c.map, &|t| lp.eval(&g, t));
    let ratio = lipschitz_estimate(&g, &c.map, 128).raw / lp.lipschitz(&g);
    assert!(ratio <= c.kappa * 1.01, "{ratio} vs kappa {}", c.kappa);
}

#[test]
fn cone_guard_trips() {
    let g = group("abelian3-rank2");
    let lp = Path1D::Circle {
        base: g.identity_f64(),
        radius: 64.0,
        plane: (0, 1),
    };
    assert!(cone_fill(&g, lp, g.identity_f64(), 8.0).is_err());
}

#[test]
fn bounded_fill_of_a_short_relation() {
    let g = group("heisenberg-tame");
    let w = letters(&g, "u:1,0,0 u:0,1,0 u:-1,0,0 u:0,-1,0 u:0,0,-1");
    let f = bounded_fill(&g, g.identity_f64(), &w, DEFAULT_BOUNDED_RADIUS).unwrap();
    let p = word_path(&g, g.identity_f64(), &w);
    assert_disk(&g, &f, &|t| p.eval(&g, t));
}

#[test]
fn rectangle_fill_removes_the_middle_block() {
    let g = group("heisenberg-tame");
    let a = letters(&g, "u:1,0,0 a:1");
    let r = letters(&g, "u:0,1,0 u:0,-1,0");
    let b = letters(&g, "u:0,0,1");
    let inner = backtrack_fill(&g, g.identity_f64(), &letters(&g, "u:0,1,0")).unwrap();
    let f = rectangle_fill(&g, g.identity_f64(), &a, &r, &b, 2, inner).unwrap();
    let some = |w: &Word| w.letters.iter().cloned().map(Some).collect::<Vec<_>>();
    let mut bottom = some(&a);
    bottom.extend(some(&r));
    bottom.extend(some(&b));
    bottom.extend(vec![None; 2]);
    let mut top = some(&a);
    top.extend(some(&b));
    top.extend(vec![None; 4]);
    let pb = SlotPath::from_letters(&g, g.identity_f64(), &bottom);
    let pt = SlotPath::from_letters(&g, g.identity_f64(), &top);
    assert!(edge_deviation(&g, &f, Edge::Bottom, &|t| pb.eval(&g, t), 512) < TOL);
    assert!(edge_deviation(&g, &f, Edge::Top, &|t| pt.eval(&g, t), 512) < TOL);
}

#[test]
fn gromov_fill_of_relation_words() {
    let g = group("heisenberg-tame");
    let nf = NormalForms::new(&g).unwrap();
    let ctx = TameCtx::for_tame_group(&nf).unwrap();
    for len in [16, 32] {
        let w = relation_word(&g, &ctx, len).unwrap();
        assert_eq!(w.len(), len);
        let f = gromov_fill(&g, &ctx, g.identity_f64(), &w).unwrap();
        let p = word_path(&g, g.identity_f64(), &w);
        assert_disk(&g, &f.map, &|t| p.eval(&g, t));
    }
}

#[test]
fn gromov_fill_rejects_non_relations() {
    let g = group("heisenberg-tame");
    let nf = NormalForms::new(&g).unwrap();
    let ctx = TameCtx::for_tame_group(&nf).unwrap();
    let w = letters(&g, "u:1,0,0");
    assert!(gromov_fill(&g, &ctx, g.identity_f64(), &w).is_err());
}

#[test]
fn tame_triangles_close_up() {
    let g = group("heisenberg-tame");
    let nf = NormalForms::new(&g).unwrap();
    let ctx = TameCtx::for_tame_group(&nf).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for m in [2, 4] {
        let t = random_triple(&g, m, &mut rng).unwrap();
        let f = tame_triangle_fill(&g, &ctx, g.identity_f64(), [&t[0], &t[1], &t[2]]).unwrap();
        let w = ctx
            .omega(&g, &t[0])
            .unwrap()
            .concat(&ctx.omega(&g, &t[1]).unwrap())
            .concat(&ctx.omega(&g, &t[2]).unwrap());
        let p = word_path(&g, g.identity_f64(), &w);
        assert_disk(&g, &f.map, &|x| p.eval(&g, x));
    }
}

/// Tag each letter with the first conic subgroup that contains it.
fn conic_tagged(g: &SolvableGroup, nf: &NormalForms, s: &str) -> Word {
    let letters = parse_letters(g, s)
        .unwrap()
        .letters
        .into_iter()
        .map(|l| {
            (0..nf.descriptor.conic.len())
                .map(|k| Letter::new(l.elem.clone(), Factor::Conic(k)))
                .find(|t| nf.descriptor.check_letter(0, t).is_ok())
                .expect("letter lies in some conic subgroup")
        })
        .collect();
    Word::new(letters)
}

#[test]
fn free_fill_bands_stack_up() {
    let g = group("abelian3-rank2");
    let nf = NormalForms::new(&g).unwrap();
    let w = conic_tagged(&g, &nf, "u:1/4,0,0 u:0,0,1/4 u:0,0,-1/4 u:-1/4,0,0");
    let ff = free_fill(&g, &nf, g.identity_f64(), &w).unwrap();
    assert_eq!(ff.band_words.len(), 2);
    let p = word_path(&g, g.identity_f64(), &w);
    assert_disk(&g, &ff.map, &|t| p.eval(&g, t));
}

#[test]
fn schedules_agree() {
    let g = group("heisenberg-tame");
    let v = letters(&g, "u:1,0,0 a:1 u:0,1,0 a:1 u:0,0,1");
    let f = backtrack_fill(&g, g.identity_f64(), &v).unwrap();
    assert_eq!(grid_max(&g, &f, 96, Schedule::Auto), grid_max(&g, &f, 96, Schedule::Sequential));
}

#[test]
fn constant_map_has_zero_lipschitz() {
    let g = group("sol");
    let f = SquareMap::Path(Path1D::Slots(Arc::new(SlotPath::constant(&g, g.identity_f64(), 4))));
    assert_eq!(lipschitz_estimate(&g, &f, 32).raw, 0.0);
}
