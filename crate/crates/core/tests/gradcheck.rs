mod common;

#[test]
fn every_op_matches_central_differences() {
    for seed in [1u64, 2, 3] {
        for op in common::OPS {
            let err = common::op_grad_error(op, 20, seed);
            println!("{op:<30} seed {seed}: {err:.3e}");
            assert!(err < 1e-6, "{op}: {err}");
        }
    }
}
