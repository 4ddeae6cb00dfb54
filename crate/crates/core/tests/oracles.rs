//! Closed-form values along the standard sequence.

use approx::assert_relative_eq;

use gfkernel::basic::BasicElement;
use gfkernel::dist::{pair, pushforward_dist, Distribution};
use gfkernel::kernel::{make_mollifier, standard_sequence, DyadicCover, KernelSequence, Mollifier};
use gfkernel::smooth::{Diffeo1D, Domain, TestFn};

fn dom() -> Domain {
    Domain::interval(-2.0, 2.0).unwrap()
}

fn setup(q: usize) -> (Mollifier, KernelSequence) {
    let rho = make_mollifier(q, 1.0).unwrap();
    let seq = standard_sequence(&dom(), &rho, &DyadicCover::standard(dom())).unwrap();
    (rho, seq)
}

#[test]
fn delta_and_its_square_at_the_origin() {
    let (rho, seq) = setup(3);
    let d = BasicElement::iota(&Distribution::delta(0.0, dom()).unwrap());
    let sq = d.mul(&d).unwrap();
    for k in [8usize, 32, 128] {
        let kern = seq.get(k).unwrap();
        let want = k as f64 * rho.value(0.0);
        assert_relative_eq!(d.eval(&kern).unwrap().value(0.0).unwrap(), want, max_relative = 1e-12);
        assert_relative_eq!(sq.eval(&kern).unwrap().value(0.0).unwrap(), want * want, max_relative = 1e-12);
    }
}

#[test]
fn heaviside_square_misses_heaviside() {
    let (_, seq) = setup(1);
    let h = BasicElement::iota(&Distribution::heaviside(dom()).unwrap());
    let diff = h.mul(&h).unwrap().sub(&h).unwrap();
    for k in [16usize, 64] {
        let f = diff.eval(&seq.get(k).unwrap()).unwrap();
        let sup = (-50..=50).map(|i| f.value(i as f64 / (25.0 * k as f64)).unwrap().abs()).fold(0.0, f64::max);
        assert!(sup >= 0.125, "k={k}: {sup}");
    }
}

#[test]
fn smooth_functions_are_reproduced_to_order() {
    let (_, seq) = setup(3);
    let p = gfkernel::smooth::SmoothFn::polynomial(vec![1.0, -2.0, 0.5, 3.0], dom());
    let r = BasicElement::iota(&Distribution::regular(p.clone()));
    let f = r.eval(&seq.get(32).unwrap()).unwrap();
    for x in [-0.4, 0.0, 0.3] {
        assert_relative_eq!(f.value(x).unwrap(), p.value(x).unwrap(), epsilon = 1e-12);
    }
}

#[test]
fn affine_pushforward_moves_delta() {
    let mu = Diffeo1D::affine(2.0, 1.0, &dom()).unwrap();
    let u = pushforward_dist(&mu, &Distribution::delta(0.0, dom()).unwrap()).unwrap();
    let phi = TestFn::bump(0.7, 1.0, mu.target()).unwrap();
    assert_relative_eq!(pair(&u, &phi).unwrap().value, phi.value(1.0).unwrap(), max_relative = 1e-12);
}
