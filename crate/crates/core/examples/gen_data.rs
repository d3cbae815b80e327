//! Regenerates the demo files in `data/` from the built-in fixtures.
//! Run from the workspace root: `cargo run -p nectk --example gen_data`

use nectk::variable_rate::{reduce_rate, ReductionVector};

fn main() {
    let net = nectk::samples::relay_network();
    std::fs::write("data/relay_network.json", net.to_json_string()).unwrap();
    let code = nectk::samples::relay_code();
    std::fs::write("data/relay_code_rate2.json", code.to_json_string()).unwrap();
    let k = ReductionVector::new(code.field(), vec![1]).unwrap();
    let reduced = reduce_rate(&code, &k).unwrap();
    std::fs::write("data/relay_code_rate1.json", reduced.to_json_string()).unwrap();
    println!("wrote data/relay_network.json and both code files");
}
