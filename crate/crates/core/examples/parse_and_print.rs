//! Parse a DSL document, show its summary, and print it canonically.
//!
//! ```sh
//! cargo run --example parse_and_print [file.dsl]
//! ```

use dslgen::dsl::{concept_summary, parse_named, print, tokenize};

const SHOP: &str = r#"
// Flavors are referenced by order lines.
enum Size { SMALL, LARGE }

main concept Shop {
    name : string isId;
    flavors <>--> Flavor;
}

concept Flavor {
    one name : string isId;
    one price : float = 2.5;
    lone vegan : bool = false;
}

concept OrderLine {
    one size : Size = SMALL;
    one flavor --> Flavor;
    lone favorite --> Flavor subset of Shop.flavors;
}
"#;

fn main() {
    let (name, source) = match std::env::args().nth(1) {
        Some(path) => {
            let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
            (path, text)
        }
        None => ("<builtin>".to_string(), SHOP.to_string()),
    };

    let tokens = tokenize(&source).unwrap_or_default();
    println!("{} tokens", tokens.len());

    let model = match parse_named(&source, &name) {
        Ok(m) => m,
        Err(diags) => {
            for d in diags {
                eprintln!("{name}: {}", d.one_line());
            }
            std::process::exit(2);
        }
    };

    let summary = concept_summary(&model);
    println!("main concept: {:?}", summary.main_concept_name);
    for c in &summary.concepts {
        println!("  {:<10} {} attribute(s), {} reference(s)", c.name, c.attributes.len(), c.references.len());
    }

    let canonical = print(&model);
    println!("\n{canonical}");

    let again = dslgen::dsl::parse(&canonical).expect("canonical output parses");
    assert!(again.structurally_eq(&model));
    assert_eq!(print(&again), canonical);
}
