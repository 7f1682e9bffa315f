use opnerve::bv::IntervalH::{self, H, H0, H1};
use opnerve::doldkan::*;
use opnerve::linalg::{q, ChainComplex, GradedSpace, Matrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn surjection_counts() {
    // 2^n monotone surjections out of [n]
    for n in 0..6 {
        assert_eq!(surjections(n).len(), 1 << n);
    }
}

#[test]
fn free_modules_on_simplicial_sets() {
    for shape in [Shape::Simplex(2), Shape::Cube(2), Shape::Q(2), Shape::Q(3)] {
        let x = SimplicialSet::build(shape.clone(), 3).module();
        let r = moore_and_normalized(&x).unwrap();
        assert!(r.passed(), "{shape:?}: {}", r.to_json());
    }
}

#[test]
fn nondegenerate_counts() {
    // Δ[2]: 3 vertices, 3 edges, 1 triangle
    let c = Chains::new(Shape::Simplex(2), 3);
    assert_eq!(c.dims(), vec![3, 3, 1, 0]);
    // Δ[1]²: 4, 5, 2
    let c = Chains::new(Shape::Cube(2), 3);
    assert_eq!(c.dims(), vec![4, 5, 2, 0]);
}

#[test]
fn shapes_are_contractible() {
    for shape in [Shape::Simplex(3), Shape::Cube(2), Shape::Q(2), Shape::Q(3)] {
        let c = Chains::new(shape.clone(), 4).complex().unwrap();
        for j in 0..4 {
            let want = usize::from(j == 0);
            assert_eq!(complex_homology_dim(&c, j), want, "{shape:?} H_{j}");
        }
    }
}

#[test]
fn gamma_then_n_is_the_identity() {
    let mut g = rng(11);
    for _ in 0..50 {
        let v = random_complex(&mut g, 0, 3, 4).unwrap();
        let r = n_gamma_identity(&v, 4).unwrap();
        assert!(r.passed(), "{}", r.to_json());
    }
}

#[test]
fn n_then_gamma_is_isomorphic() {
    let mut g = rng(12);
    for i in 0..50 {
        let v = random_complex(&mut g, 0, 3, 3).unwrap();
        let x = gamma(&v, 3).unwrap().module;
        let x = x.conjugate(&random_base_change(&mut g, &x.dims)).unwrap();
        assert!(x.check_identities().passed());
        let r = gamma_n_iso(&x).unwrap();
        assert!(r.passed(), "instance {i}: {}", r.to_json());
    }
    for shape in [Shape::Simplex(2), Shape::Q(2)] {
        let x = SimplicialSet::build(shape, 3).module();
        assert!(gamma_n_iso(&x).unwrap().passed());
    }
}

#[test]
fn gamma_rejects_negative_degrees() {
    let sp = GradedSpace::new(vec![("u".into(), -1), ("w".into(), 0)], (-2, 1)).unwrap();
    let v = ChainComplex::zero_differential(sp);
    assert!(gamma(&v, 2).is_err());
}

#[test]
fn eilenberg_zilber_and_alexander_whitney() {
    let pairs = [
        (Shape::Simplex(1), Shape::Simplex(1)),
        (Shape::Simplex(2), Shape::Simplex(1)),
        (Shape::Cube(1), Shape::Cube(2)),
        (Shape::Simplex(2), Shape::Simplex(2)),
    ];
    for (a, b) in pairs {
        let r = ez_and_aw(&a, &b, 4);
        assert!(r.passed(), "{a:?} × {b:?}: {}", r.to_json());
    }
}

#[test]
fn alpha_two_by_hand() {
    // α₂(h⊗h) = e₂⊗e₁ − e₁⊗e₂ in level 2
    let a = alpha(&[H, H]);
    let want: ChainVec = [((2, vec![2, 1]), q(1)), ((2, vec![1, 2]), q(-1))]
        .into_iter()
        .collect();
    assert_eq!(a, want);
    assert_eq!(alpha_ez(&[H, H]), want);
    // h₀ and h₁ are the two vertices
    assert_eq!(
        alpha(&[H0, H1]),
        [((0, vec![0, 1]), q(1))].into_iter().collect()
    );
}

#[test]
fn alpha_formula_and_laws() {
    let r = check_alpha(4);
    assert!(r.passed(), "{}", r.to_json());
}

#[test]
fn cosimplicial_objects() {
    for k in [delta_cosimplicial(3).unwrap(), q_cosimplicial(3).unwrap()] {
        let r = k.check().unwrap();
        assert!(r.passed(), "{}", r.to_json());
    }
}

#[test]
fn beta_on_vertices() {
    // the vertex of Q[n] with the first j coordinates all ones goes to j
    for n in 1..4usize {
        for j in 0..=n {
            let x: Vec<u8> = (0..n).map(|i| u8::from(i < j)).collect();
            let x = Shape::Q(n).canon(x, 0);
            assert_eq!(beta(&x, 0), vec![j as u8]);
        }
    }
}

#[test]
fn b_after_a_is_the_identity() {
    let r = check_a_and_b(4, 3).unwrap();
    assert!(r.passed(), "{}", r.to_json());
}

#[test]
fn delta_labels_follow_the_vertices() {
    let l: Vec<IntervalH> = delta_labels(&[1, 3], 3);
    assert_eq!(l, vec![H1, H0, H]);
}

#[test]
fn chain_maps_from_a_point() {
    let mut g = rng(14);
    let v = random_complex(&mut g, 0, 2, 4).unwrap();
    let point = Chains::new(Shape::Simplex(0), 0).complex().unwrap();
    let maps = chain_maps(&point, &v);
    // degree-0 cycles of V
    let z0 = v.d_block(0).cols() - Matrix::rank(&v.d_block(0));
    assert_eq!(maps.len(), z0);
}

#[test]
fn mapping_spaces_compare() {
    let mut g = rng(15);
    let c = Comparison::new(4).unwrap();
    for i in 0..8 {
        let v = random_complex(&mut g, 0, 3, 4).unwrap();
        let r = c.run(&v).unwrap();
        assert!(r.passed(), "instance {i}: {}", r.to_json());
    }
}

#[test]
fn comparison_at_level_two_matches_the_free_function() {
    let mut g = rng(16);
    let v = random_complex(&mut g, 0, 2, 3).unwrap();
    assert!(big_vs_hc_comparison(&v, 2).unwrap().passed());
    assert!(Comparison::new(0).is_err());
}
