use fpcs_web::Demo;

#[test]
fn builds_and_scans() {
    let demo = Demo::build(1, 32, 2, "canny").unwrap();
    assert_eq!(demo.count(), 16);
    assert_eq!(demo.side(), 32);
    let rows = demo.scan("none", 0).unwrap();
    assert_eq!(rows.len(), 16);
    let in_base = demo.in_base();
    assert_eq!(in_base.iter().filter(|&&b| b == 1).count(), 8);
    for (row, flag) in rows.iter().zip(&in_base) {
        if *flag == 1 {
            assert_eq!(row.h, 0.0);
        }
    }
}

#[test]
fn edges_are_binary_bytes() {
    let demo = Demo::build(2, 24, 1, "none").unwrap();
    let bytes = demo.edges_of(0, "sobel", 1.0).unwrap();
    assert_eq!(bytes.len(), 24 * 24);
    assert!(bytes.iter().all(|&b| b == 0 || b == 255));
    assert!(demo.edges_of(99, "canny", 1.0).is_err());
    assert!(demo.edges_of(0, "laplace", 1.0).is_err());
}

#[test]
fn roc_triples_are_monotone() {
    let demo = Demo::build(3, 24, 2, "sobel").unwrap();
    let flat = demo.sweep("medium", 4, 11).unwrap();
    assert_eq!(flat.len(), 33);
    let pts: Vec<&[f64]> = flat.chunks(3).collect();
    assert_eq!(pts[0][0], 0.0);
    assert_eq!(pts[10][0], 1.0);
    for w in pts.windows(2) {
        assert!(w[1][1] <= w[0][1] && w[1][2] >= w[0][2]);
    }
    assert!(demo.sweep("loud", 0, 11).is_err());
}
