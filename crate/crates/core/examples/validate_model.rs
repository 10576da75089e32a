//! Semantic validation, including resolution against symbols exported by
//! another model.
//!
//! ```sh
//! cargo run --example validate_model
//! ```

use dslgen::dsl::parse;
use dslgen::prompt::render_feedback;
use dslgen::validate::{export_symbols, validate};

const BROKEN: &str = "main concept Order {
    one id : int isId;
    one code : string isId;
    one total : Money;
    one customer --> Customer;
    lone rush : bool = 3;
}

concept Base extends Order {
}

concept Order2 extends Order2 {
}
";

const CATALOG: &str = "main concept Catalog {
    items <>--> Item;
}

concept Item {
    one sku : string isId;
}
";

const SCREEN: &str = "main concept ItemScreen {
    one shown --> Item;
    lone back --> Catalog;
}
";

fn main() {
    let model = parse(BROKEN).expect("syntactically valid");
    let report = validate(&model, None);
    println!("valid: {}", report.valid);
    for d in &report.diagnostics {
        println!("  {}", d.one_line());
    }
    println!("\nfeedback view:\n{}", render_feedback(&report.diagnostics, BROKEN).unwrap());

    // A second model may point at concepts of the first.
    let catalog = parse(CATALOG).unwrap();
    let screen = parse(SCREEN).unwrap();
    println!("screen alone: {:?}", validate(&screen, None).codes());
    let symbols = export_symbols(&catalog);
    let with_symbols = validate(&screen, Some(&symbols));
    println!("screen with catalog symbols: valid = {}", with_symbols.valid);
    assert!(with_symbols.valid);
}
