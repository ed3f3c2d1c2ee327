use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use modac_core::neural::{
    load_checkpoint, save_checkpoint, Activation, Adam, GcnLayer, NormalizedAdjacency, OutputGrad, PolicyConfig,
    PolicyNet, TrainingState,
};
use modac_core::{DenseMatrix, StateGraph};

fn random_graph(rng: &mut ChaCha8Rng, n: usize, d: usize) -> StateGraph {
    let data = (0..n * d).map(|_| rng.random::<f64>()).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(0.3) {
                edges.push((i, j));
            }
        }
    }
    StateGraph { node_features: DenseMatrix::from_vec(n, d, data), edges, budget_feature: rng.random() }
}

/// D^{-1/2} (A + I) D^{-1/2} built entry by entry.
fn dense_normalized(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        a[i][i] = 1.0;
    }
    for &(i, j) in edges {
        a[i][j] = 1.0;
        a[j][i] = 1.0;
    }
    let deg: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    (0..n).map(|i| (0..n).map(|j| a[i][j] / (deg[i] * deg[j]).sqrt()).collect()).collect()
}

#[test]
fn gcn_layer_matches_dense_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let n = rng.random_range(1..12);
        let (din, dout) = (rng.random_range(1..5), rng.random_range(1..6));
        let g = random_graph(&mut rng, n, din);
        let w = DenseMatrix::from_vec(din, dout, (0..din * dout).map(|_| rng.random_range(-1.0..1.0)).collect());
        let bias: Vec<f64> = (0..dout).map(|_| rng.random_range(-1.0..1.0)).collect();
        let layer = GcnLayer { weight: w.clone(), bias: bias.clone(), activation: Activation::Tanh };
        let adj = NormalizedAdjacency::new(n, &g.edges).unwrap();
        let got = layer.forward(&adj, &g.node_features).unwrap().output;

        let a = dense_normalized(n, &g.edges);
        for i in 0..n {
            for k in 0..dout {
                let mut s = bias[k];
                for j in 0..n {
                    for f in 0..din {
                        s += a[i][j] * g.node_features.get(j, f) * w.get(f, k);
                    }
                }
                assert!((got.get(i, k) - s.tanh()).abs() < 1e-12);
            }
        }
    }
}

fn loss(net: &PolicyNet, g: &StateGraph, c_mean: &[f64], c_value: f64, c_log_std: &[f64]) -> f64 {
    let out = net.predict(g).unwrap();
    let m: f64 = out.mean.iter().zip(c_mean).map(|(a, b)| a * b).sum();
    let s: f64 = net.log_std().iter().zip(c_log_std).map(|(a, b)| a * b).sum();
    m + c_value * out.value + s
}

#[test]
fn every_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for trial in 0..20 {
        let cfg = PolicyConfig {
            num_objectives: rng.random_range(2..=5),
            hidden: 8,
            gcn_layers: 1 + trial % 2,
            aux_dim: (trial / 2) % 2,
            action_dim: rng.random_range(2..=3),
        };
        let mut net = PolicyNet::new(cfg, trial as u64).unwrap();
        // Nonzero biases exercise every path.
        let mut p = net.parameters();
        for v in p.iter_mut() {
            *v += rng.random_range(-0.1..0.1);
        }
        net.set_parameters(&p);
        let n = rng.random_range(1..=10);
        let g = random_graph(&mut rng, n, cfg.num_objectives);
        let c_mean: Vec<f64> = (0..cfg.action_dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let c_ls: Vec<f64> = (0..cfg.action_dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let c_value = rng.random_range(-1.0..1.0);

        let (_, cache) = net.forward(&g).unwrap();
        let grad = OutputGrad { mean: c_mean.clone(), value: c_value, log_std: c_ls.clone() };
        let analytic = net.backward(&cache, &grad).unwrap();
        let base = net.parameters();
        let eps = 1e-5;
        for (name, range) in net.parameter_groups() {
            for i in range {
                let mut probe = net.clone();
                let mut q = base.clone();
                q[i] += eps;
                probe.set_parameters(&q);
                let up = loss(&probe, &g, &c_mean, c_value, &c_ls);
                q[i] -= 2.0 * eps;
                probe.set_parameters(&q);
                let down = loss(&probe, &g, &c_mean, c_value, &c_ls);
                let numeric = (up - down) / (2.0 * eps);
                let scale = analytic[i].abs().max(numeric.abs()).max(1e-6);
                assert!(
                    (analytic[i] - numeric).abs() / scale < 1e-4,
                    "trial {trial} {name}[{i}]: analytic {} numeric {numeric}",
                    analytic[i]
                );
            }
        }
    }
}

#[test]
fn outputs_are_bit_stable() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = random_graph(&mut rng, 9, 3);
    let a = PolicyNet::new(PolicyConfig::new(3, 2), 77).unwrap();
    let b = PolicyNet::new(PolicyConfig::new(3, 2), 77).unwrap();
    let (x, y) = (a.predict(&g).unwrap(), b.predict(&g).unwrap());
    assert_eq!(x.mean.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), y.mean.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    assert_eq!(x.value.to_bits(), y.value.to_bits());
    assert!(x.mean.iter().all(|m| m.abs() < 1.0));
}

#[test]
fn pooling_ignores_node_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let g = random_graph(&mut rng, 6, 2);
    let perm = [3usize, 0, 5, 1, 4, 2];
    let mut data = vec![0.0; 12];
    for (new, &old) in perm.iter().enumerate() {
        data[new * 2..new * 2 + 2].copy_from_slice(g.node_features.row(old));
    }
    let inv: Vec<usize> = (0..6).map(|o| perm.iter().position(|&p| p == o).unwrap()).collect();
    let edges = g.edges.iter().map(|&(i, j)| (inv[i].min(inv[j]), inv[i].max(inv[j]))).collect();
    let h = StateGraph { node_features: DenseMatrix::from_vec(6, 2, data), edges, budget_feature: g.budget_feature };
    let net = PolicyNet::new(PolicyConfig::new(2, 3), 5).unwrap();
    let (x, y) = (net.predict(&g).unwrap(), net.predict(&h).unwrap());
    for (a, b) in x.mean.iter().zip(&y.mean) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!((x.value - y.value).abs() < 1e-12);
}

#[test]
fn checkpoint_file_round_trip_keeps_optimizer_state() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ck.json");
    let mut net = PolicyNet::new(PolicyConfig { aux_dim: 0, gcn_layers: 1, ..PolicyConfig::new(5, 2) }, 9).unwrap();
    let mut adam = Adam::new(net.num_parameters(), 1e-3);
    let grads: Vec<f64> = (0..net.num_parameters()).map(|i| (i as f64).sin()).collect();
    net.apply_gradients(&mut adam, &grads);
    save_checkpoint(&net, Some(&TrainingState { epoch: 3, optimizer: adam.clone() }), &path).unwrap();
    let ck = load_checkpoint(&path).unwrap();
    assert_eq!(ck.architecture.aux_dim, 0);
    assert_eq!(ck.architecture.gcn_layers, 1);
    let back = ck.policy().unwrap();
    assert_eq!(back.parameters(), net.parameters());
    let state = ck.training.clone().unwrap();
    assert_eq!(state.epoch, 3);
    assert_eq!(state.optimizer, adam);
    assert!(ck.ensure_compatible(5, 2).is_ok());
    assert!(ck.ensure_compatible(2, 2).is_err());
}
