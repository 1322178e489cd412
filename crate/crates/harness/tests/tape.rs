//! Finite-difference checks of every tape primitive on random small instances.

use hd_core::Tensor;
use hd_harness::{tape_grad_check, DepthReduce, Tape, Var};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INSTANCES: usize = 100;
const TOL: f64 = 1e-4;

fn random(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor<f64> {
    Tensor::from_fn(shape, |_| rng.gen_range(-1.0..1.0))
}

/// Checks `build` by contracting its output with a fixed random tensor.
fn check(name: &str, inputs: &[Tensor<f64>], rng: &mut ChaCha8Rng, build: impl Fn(&mut Tape<f64>, &[Var]) -> Var) {
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|x| tape.leaf(x.clone())).collect();
    let out = build(&mut tape, &vars);
    let probe = random(tape.value(out).shape(), rng);
    let r = tape_grad_check(inputs, &probe, 1e-6, |t, v| Ok(build(t, v))).unwrap();
    assert!(r.max_rel_error <= TOL, "{name}: relative error {}", r.max_rel_error);
    assert!(r.checked > 0, "{name}: every coordinate skipped");
}

fn run(seed: u64, mut case: impl FnMut(&mut ChaCha8Rng)) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..INSTANCES {
        case(&mut rng);
    }
}

#[test]
fn conv_2d_and_3d() {
    run(1, |rng| {
        let (b, ci, co) = (rng.gen_range(1..3), rng.gen_range(1..3), rng.gen_range(1..3));
        let three = rng.gen_bool(0.5);
        let k = if rng.gen_bool(0.5) { 3 } else { 1 };
        let (xs, ws): (Vec<usize>, Vec<usize>) = if three {
            (vec![b, ci, 3, 3, 2], vec![co, ci, k, k, k])
        } else {
            (vec![b, ci, 4, 3], vec![co, ci, k, k])
        };
        let inputs = [random(&xs, rng), random(&ws, rng), random(&[co], rng)];
        check("conv", &inputs, rng, |t, v| t.conv(v[0], v[1], v[2]).unwrap());
    });
}

#[test]
fn relu() {
    run(2, |rng| {
        let inputs = [random(&[2, 3, 4], rng)];
        check("relu", &inputs, rng, |t, v| t.relu(v[0]));
    });
}

#[test]
fn avg_pool_and_gap() {
    run(3, |rng| {
        let shape = if rng.gen_bool(0.5) { vec![2, 2, 4, 4] } else { vec![1, 2, 2, 4, 2] };
        let inputs = [random(&shape, rng)];
        check("avg_pool2", &inputs, rng, |t, v| t.avg_pool2(v[0]).unwrap());
        check("gap", &inputs, rng, |t, v| t.gap(v[0]).unwrap());
    });
}

#[test]
fn linear() {
    run(4, |rng| {
        let (b, i, o) = (rng.gen_range(1..4), rng.gen_range(1..5), rng.gen_range(1..5));
        let inputs = [random(&[b, i], rng), random(&[o, i], rng), random(&[o], rng)];
        check("linear", &inputs, rng, |t, v| t.linear(v[0], v[1], v[2]).unwrap());
    });
}

#[test]
fn softmax_cross_entropy() {
    run(5, |rng| {
        let (b, k) = (rng.gen_range(1..5), rng.gen_range(2..6));
        let labels: Vec<usize> = (0..b).map(|_| rng.gen_range(0..k)).collect();
        let inputs = [random(&[b, k], rng).scale(3.0)];
        check("softmax_ce", &inputs, rng, |t, v| t.softmax_ce(v[0], &labels).unwrap());
    });
}

#[test]
fn elementwise_and_shape_ops() {
    run(6, |rng| {
        let inputs = [random(&[3, 4], rng), random(&[3, 4], rng)];
        let k = rng.gen_range(-2.0..2.0);
        check("mul", &inputs, rng, |t, v| t.mul(v[0], v[1]).unwrap());
        check("add", &inputs, rng, |t, v| t.add(v[0], v[1]).unwrap());
        check("scale", &inputs[..1], rng, |t, v| t.scale(v[0], k));
        check("sum", &inputs[..1], rng, |t, v| t.sum(v[0]));
        check("reshape", &inputs[..1], rng, |t, v| t.reshape(v[0], &[2, 6]).unwrap());
    });
}

#[test]
fn depth_reducers() {
    run(7, |rng| {
        let d = rng.gen_range(1..4);
        let x = random(&[2, 2, d, 2, 3], rng);
        check("reduce avg", &[x.clone()], rng, |t, v| t.reduce_depth(v[0], DepthReduce::Avg, None).unwrap());
        check("reduce max", &[x.clone()], rng, |t, v| t.reduce_depth(v[0], DepthReduce::Max, None).unwrap());
        let w = random(&[d], rng);
        check("reduce conv", &[x, w], rng, |t, v| t.reduce_depth(v[0], DepthReduce::Conv, Some(v[1])).unwrap());
    });
}

#[test]
fn custom_op_routes_supplied_gradients() {
    run(8, |rng| {
        // f(a, b) = ⟨a, b⟩ evaluated off-tape, with its exact partials supplied.
        let inputs = [random(&[5], rng), random(&[5], rng)];
        check("custom", &inputs, rng, |t, v| {
            let (a, b) = (t.value(v[0]).clone(), t.value(v[1]).clone());
            t.custom(a.dot(&b).unwrap(), &[v[0], v[1]], vec![b, a]).unwrap()
        });
    });
}

#[test]
fn composed_network_forward() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..INSTANCES {
        let inputs = [
            random(&[2, 1, 4, 4], &mut rng),
            random(&[2, 1, 3, 3], &mut rng),
            random(&[2], &mut rng),
            random(&[3, 2], &mut rng),
            random(&[3], &mut rng),
        ];
        let labels = [0usize, 2];
        check("network", &inputs, &mut rng, |t, v| {
            let h = t.conv(v[0], v[1], v[2]).unwrap();
            let h = t.relu(h);
            let h = t.avg_pool2(h).unwrap();
            let g = t.gap(h).unwrap();
            let l = t.linear(g, v[3], v[4]).unwrap();
            t.softmax_ce(l, &labels).unwrap()
        });
    }
}

#[test]
fn seeded_backward_stops_at_floor() {
    let mut tape = Tape::<f64>::new();
    let x = tape.leaf(Tensor::from_vec(&[2], vec![1.0, 2.0]).unwrap());
    let y = tape.scale(x, 3.0);
    let z = tape.scale(y, 2.0);
    let g = tape.backward_from(z, Tensor::filled(&[2], 1.0), y.index()).unwrap();
    assert_eq!(g.get(y).unwrap().data(), &[2.0, 2.0]);
    assert!(g.get(x).is_none());
}
