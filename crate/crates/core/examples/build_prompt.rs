//! Render the generation prompt and a retry prompt carrying diagnostics.
//!
//! ```sh
//! cargo run --example build_prompt -- "a bakery that sells bread and pastries"
//! ```

use dslgen::dsl::parse;
use dslgen::prompt::{build_generation_prompt, build_retry_prompt, PromptSpec};

fn main() {
    let input = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "A small bakery selling bread and pastries to regular customers.".into());
    let spec = PromptSpec::new(&input);

    let first = build_generation_prompt(&spec).expect("default template renders");
    println!("template hash {}\n", first.template_hash);
    for m in &first.messages {
        println!("===== {:?} ({} chars) =====", m.role, m.content.len());
        println!("{}\n", m.content);
    }

    let bad_output = "main concept Bakery {\n    one name : string\n}\n";
    let diags = parse(bad_output).expect_err("missing semicolon");
    let retry = build_retry_prompt(&spec, bad_output, &diags).unwrap();
    println!("===== retry adds {} message(s) =====", retry.messages.len() - first.messages.len());
    println!("{}", retry.messages.last().unwrap().content);
}
