use super::*;
use crate::instance::fixtures::{e1, e1_tree, e2};
use crate::unfold::alternating_tree;

fn norm(inst: Instance) -> NormalizedInstance {
    NormalizedInstance::certify_relaxed(inst).unwrap()
}

#[test]
fn params_contract() {
    let p = Params::new(3, 1e-9).unwrap();
    assert_eq!((p.r(), p.horizon()), (1, 19));
    assert!(Params::new(1, 1e-9).is_err());
    assert!(Params::new(2, 0.0).is_err());
    assert!(p.with_horizon(18).is_err());
    assert_eq!(p.with_horizon(36).unwrap().horizon(), 36);
}

#[test]
fn e1_feasibility_around_t() {
    let tree = alternating_tree(&e1(), 0, 1).unwrap();
    assert!(f_feasible(&tree, 1.4));
    assert!(!f_feasible(&tree, 1.6));
    assert!(f_feasible(&tree, 0.0));
    assert!(f_feasible(
        &alternating_tree(&e1_tree(), 2, 2).unwrap(),
        0.0
    ));
}

#[test]
fn t_values() {
    let tol = 1e-9;
    let t = compute_t(&alternating_tree(&e1(), 0, 0).unwrap(), tol);
    assert!(t <= 2.0 && t >= 2.0 - tol, "{t}");
    let t = compute_t(&alternating_tree(&e1(), 0, 1).unwrap(), tol);
    assert!(t <= 1.5 && t >= 1.5 - tol, "{t}");
    let t = compute_t(&alternating_tree(&e2(), 0, 0).unwrap(), tol);
    assert!(t <= 1.5 && t >= 1.5 - tol, "{t}");
}

#[test]
fn s_values() {
    assert_eq!(
        compute_s(&norm(e1()), &[1.5, 1.5], 1).unwrap(),
        vec![1.5, 1.5]
    );
    assert_eq!(
        compute_s(&norm(e2()), &[1.5, 1.5], 0).unwrap(),
        vec![1.5, 1.5]
    );
    let s = compute_s(&norm(e1_tree()), &[3.0, 1.0, 2.0, 4.0], 0).unwrap();
    // Distance 2 reaches the objective partner and the constraint partner.
    assert_eq!(s, vec![1.0, 1.0, 2.0, 1.0]);
    assert!(compute_s(&norm(e1()), &[1.0], 0).is_err());
}

#[test]
fn g_values() {
    let g = compute_g(&norm(e1()), &[1.5, 1.5], 1).unwrap();
    for v in 0..2 {
        assert_eq!(
            (g.plus[0][v], g.minus[0][v], g.plus[1][v], g.minus[1][v]),
            (1.0, 0.5, 0.5, 1.0)
        );
    }
    let g = compute_g(&norm(e2()), &[1.5, 1.5], 0).unwrap();
    assert_eq!(g.plus[0], vec![1.0, 0.5]);
    assert_eq!(g.minus[0], vec![1.0, 0.5]);
    let g = compute_g(&norm(e2()), &[0.0, 0.0], 3).unwrap();
    for d in 0..=3 {
        assert_eq!(g.minus[d], vec![0.0, 0.0]);
        assert_eq!(g.plus[d], g.plus[0]);
    }
    assert!(g
        .to_tsv()
        .starts_with("agent\td\tg_plus\tg_minus\n0\t0\t1.0\t0.0\n"));
}

#[test]
fn outputs() {
    let g = compute_g(&norm(e1()), &[1.5, 1.5], 1).unwrap();
    assert_eq!(output_x(&g, 3).values, vec![0.5, 0.5]);
    let g = compute_g(&norm(e2()), &[1.5, 1.5], 0).unwrap();
    assert_eq!(output_x(&g, 2).values, vec![0.5, 0.25]);
    let zero = GTable {
        s: vec![0.0; 2],
        plus: vec![vec![0.0; 2]],
        minus: vec![vec![0.0; 2]],
    };
    assert_eq!(output_x(&zero, 2).values, vec![0.0, 0.0]);
}

#[test]
fn whole_algorithm() {
    let close =
        |x: &Solution, y: [f64; 2]| x.values.iter().zip(y).all(|(a, b)| (a - b).abs() <= 1e-6);
    let p3 = Params::new(3, 1e-9).unwrap();
    let p2 = Params::new(2, 1e-9).unwrap();
    assert!(close(&solve_local(&norm(e1()), &p3).unwrap(), [0.5, 0.5]));
    assert!(close(&solve_local(&norm(e1()), &p2).unwrap(), [0.5, 0.5]));
    assert!(close(&solve_local(&norm(e2()), &p2).unwrap(), [0.5, 0.25]));
}

#[test]
fn ftable_dump() {
    let tree = alternating_tree(&e1(), 0, 1).unwrap();
    let f = FTable::new(&tree, 1.5);
    let tsv = f.to_tsv(&tree);
    assert_eq!(tsv.lines().count(), 5);
    assert_eq!(f.minus[0], 1.0);
}

#[test]
fn layers_on_tree() {
    let inst = e1_tree();
    let l = assign_layers(&inst, 0, 0).unwrap();
    assert_eq!(l.layer(Node::Agent(0)), -1);
    assert_eq!(l.layer(Node::Objective(0)), 0);
    assert_eq!(l.layer(Node::Agent(2)), 1);
    assert_eq!(l.roles[2], Role::Down);
    assert_eq!(l.roles[1], Role::Down);
    let flipped = assign_layers(&inst, 0, 2).unwrap();
    assert_eq!(flipped.layer(Node::Agent(2)), -1);
    assert_eq!(flipped.roles[0], Role::Down);
    assert_eq!(flipped.roles[1], Role::Up);
    assert!(matches!(assign_layers(&e1(), 0, 0), Err(Error::NotATree)));
}

#[test]
fn shifting() {
    let inst = e1_tree();
    let layers = assign_layers(&inst, 0, 0).unwrap();
    let (period, r) = (3, 1);
    let g = compute_g(&norm(inst), &[1.0, 1.0, 1.0, 1.0], r).unwrap();
    // v0 is an up-agent at layer -1: shift j gives d = (0 - j) mod 3.
    let y0 = shift_solution(&g, &layers, 0, period).unwrap();
    assert_eq!(y0.get(0), g.minus[r][0]);
    let y1 = shift_solution(&g, &layers, 1, period).unwrap();
    assert_eq!(y1.get(0), 0.0);
    assert!(shift_solution(&g, &layers, 3, period).is_err());
    let avg = averaged_shift(&g, &layers, period);
    for v in 0..4 {
        let mean = (0..period)
            .map(|j| shift_solution(&g, &layers, j, period).unwrap().get(v))
            .sum::<f64>()
            / period as f64;
        assert!((mean - avg.get(v)).abs() < 1e-12);
    }
}
