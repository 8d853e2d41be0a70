#![no_main]

use libfuzzer_sys::fuzz_target;
use voronoigram::graph::{parse_graph, write_graph};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(graph) = parse_graph(text) {
        let again = parse_graph(&write_graph(&graph)).expect("written graph reparses");
        assert_eq!(again, graph);
    }
});
