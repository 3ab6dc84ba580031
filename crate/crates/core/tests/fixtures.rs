use std::path::PathBuf;

use pqa_core::graph::{brute_force_mis, gen_er, gen_regular, Graph, VertexSubset};
use pqa_core::metrics::oar_aar;
use pqa_core::pqa::{pqa_run, PqaConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fixture(name: &str) -> Graph {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    Graph::read_edge_list(path).unwrap()
}

#[test]
fn erdos_renyi_generator_is_stable() {
    let g = gen_er(14, 0.5, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
    assert_eq!(g, fixture("er14_p05_seed7.txt"));
}

#[test]
fn regular_generator_is_stable() {
    let g = gen_regular(14, 3, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
    assert_eq!(g, fixture("reg14_d3_seed11.txt"));
    assert!(g.degrees().iter().all(|&d| d == 3));
}

#[test]
fn five_vertex_fixture_oracle() {
    let oracle = brute_force_mis(&fixture("hub5.txt")).unwrap();
    assert_eq!(oracle.independence_number, 3);
    assert_eq!(
        oracle.all_mis_sets,
        vec![VertexSubset::from([1, 2, 3]), VertexSubset::from([1, 2, 4])]
    );
}

#[test]
fn progressive_ratios_on_the_er_fixture() {
    let g = fixture("er14_p05_seed7.txt");
    let beta = brute_force_mis(&g).unwrap().independence_number as f64;
    let cfg = PqaConfig::default();
    let ratios: Vec<f64> = (0..100)
        .map(|seed| pqa_run(&g, &cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap().final_f / beta)
        .collect();
    let (oar, aar) = oar_aar(&ratios).unwrap();
    assert_eq!(beta, 4.0);
    assert!((oar - 0.999999940156).abs() < 1e-9, "oar {oar}");
    assert!((aar - 0.867365474157).abs() < 1e-9, "aar {aar}");
}
