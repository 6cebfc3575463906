use fuseforge::graph::{
    erm, partition_greedy, read_edge_list, read_edge_list_from, sbm, star, torus2d, write_edge_list,
    write_edge_list_to, Graph,
};

#[test]
fn edge_list_file_round_trip() {
    let g = erm(120, 0.05, 9).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.edges");
    write_edge_list(&g, &path).unwrap();
    assert_eq!(read_edge_list(&path).unwrap(), g);

    let mut text = Vec::new();
    write_edge_list_to(&star(4).unwrap(), &mut text).unwrap();
    assert_eq!(String::from_utf8(text).unwrap(), "4 3\n0 1\n0 2\n0 3\n");
}

#[test]
fn edge_list_rejects_malformed_input() {
    for bad in ["", "3 1\n0 5\n", "2 1\n0 x\n", "2 2\n0 1\n"] {
        assert!(read_edge_list_from(bad.as_bytes()).is_err(), "{bad:?}");
    }
    let err = read_edge_list(std::path::Path::new("/nonexistent/g.edges")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/g.edges"), "{err}");
}

#[test]
fn sbm_blocks_are_disconnected_and_dense_enough() {
    let g = sbm(1000, 5, 0.01, 0.0, 3).unwrap();
    assert!(g.edges().all(|(u, v)| u / 200 == v / 200));
    // Binomial(C(200, 2), 0.01): mean 199, sd about 14.
    let expected = 19900.0 * 0.01;
    let sd = (19900.0f64 * 0.01 * 0.99).sqrt();
    for b in 0..5u32 {
        let count = g.edges().filter(|&(u, _)| u / 200 == b).count() as f64;
        assert!((count - expected).abs() <= 3.0 * sd, "block {b}: {count}");
    }
    assert_eq!(sbm(50, 5, 0.0, 0.0, 1).unwrap().edge_count(), 0);
}

#[test]
fn erm_edge_count_is_binomial() {
    let g = erm(1000, 0.01, 4).unwrap();
    let mean = 499_500.0 * 0.01;
    let sd = (499_500.0f64 * 0.01 * 0.99).sqrt();
    assert!((g.edge_count() as f64 - mean).abs() <= 3.0 * sd, "{}", g.edge_count());
    assert_eq!(erm(300, 0.02, 4).unwrap(), erm(300, 0.02, 4).unwrap());
    assert_ne!(erm(300, 0.02, 4).unwrap(), erm(300, 0.02, 5).unwrap());
}

#[test]
fn greedy_keeps_torus_neighborhoods_together() {
    let g: Graph = torus2d(20, 20).unwrap();
    let greedy = partition_greedy(&g, 40, 1).unwrap();
    let random = fuseforge::graph::partition_random(&g, 40, 1).unwrap();
    assert!(greedy.cross_edge_count() < random.cross_edge_count() / 2);
}
