#![no_main]

use libfuzzer_sys::fuzz_target;
use lj_halfline::operator::TridiagonalOperator;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(op) = TridiagonalOperator::from_json(text) {
        assert_eq!(op.dim(), op.grid().n_interior());
        assert_eq!(op.diag().len(), op.dim());
        assert_eq!(op.offdiag().len(), op.dim().saturating_sub(1));
        let (lo, hi) = op.gershgorin_bounds();
        assert!(lo.is_finite() && hi.is_finite() && lo <= hi);
        let ones = vec![1.0; op.dim()];
        assert!(op.apply(&ones).iter().all(|y| y.is_finite()));
    }
});
