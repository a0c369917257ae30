#![no_main]

use libfuzzer_sys::fuzz_target;
use lj_halfline::grid::Grid;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(grid) = Grid::from_json(text) {
        let nodes = grid.nodes();
        assert!(nodes.len() >= 16);
        assert!(nodes.windows(2).all(|w| w[1] > w[0]), "accepted grid is not increasing");
        assert!(nodes.iter().all(|x| x.is_finite()));
        assert!(grid.weights().iter().all(|w| *w > 0.0));
        let roundtripped = Grid::from_json(&grid.to_json()).expect("roundtrip");
        assert_eq!(grid.nodes(), roundtripped.nodes());
    }
});
