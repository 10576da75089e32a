//! Fixtures and generators shared by the integration and acceptance tests.
#![allow(dead_code)]

use dslgen::dsl::{
    ArrowKind, Attribute, Cardinality, ConceptDef, DiagnosticCode, DslModel, Element, EnumDef, Feature, Ident,
    Literal, LiteralKind, PrimitiveType, Reference, SourceSpan, SubsetOf, TypeName, KEYWORDS,
};
use rand::seq::SliceRandom;
use rand::Rng;

// ---------------------------------------------------------------- generator

fn z() -> SourceSpan {
    SourceSpan::start_of_input()
}

pub fn ident<R: Rng + ?Sized>(rng: &mut R) -> String {
    const START: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz_";
    const REST: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz_0123456789";
    loop {
        let mut s = String::new();
        s.push(*START.choose(rng).unwrap() as char);
        for _ in 0..rng.gen_range(0..8) {
            s.push(*REST.choose(rng).unwrap() as char);
        }
        if !KEYWORDS.contains(&s.as_str()) {
            return s;
        }
    }
}

fn fresh<R: Rng + ?Sized>(rng: &mut R, taken: &mut Vec<String>) -> String {
    loop {
        let s = ident(rng);
        if !taken.contains(&s) {
            taken.push(s.clone());
            return s;
        }
    }
}

fn literal<R: Rng + ?Sized>(rng: &mut R) -> Literal {
    let (kind, value) = match rng.gen_range(0..5) {
        0 => {
            const PIECES: &[&str] = &["a", "Z", " ", "\\\"", "\\\\", "é", "日本", "-->", ";", "{"];
            let body: String = (0..rng.gen_range(0..6)).map(|_| *PIECES.choose(rng).unwrap()).collect();
            (LiteralKind::String, format!("\"{body}\""))
        }
        1 => {
            let sign = if rng.gen_bool(0.3) { "-" } else { "" };
            (LiteralKind::Int, format!("{sign}{}", rng.gen_range(0..100_000u32)))
        }
        2 => (
            LiteralKind::Float,
            format!("{}.{}", rng.gen_range(0..1000u32), rng.gen_range(0..1000u32)),
        ),
        3 => (LiteralKind::Bool, if rng.gen() { "true" } else { "false" }.to_string()),
        _ => (LiteralKind::EnumRef, ident(rng)),
    };
    Literal { kind, value, span: z() }
}

/// A random syntactically well-formed model. Names may be dangling or
/// duplicated; only the syntax is guaranteed.
pub fn random_model(rng: &mut impl Rng) -> DslModel {
    let mut names = Vec::new();
    let n_concepts = rng.gen_range(0..6);
    let n_enums = rng.gen_range(0..3);
    let concept_names: Vec<String> = (0..n_concepts).map(|_| fresh(rng, &mut names)).collect();
    let enum_names: Vec<String> = (0..n_enums).map(|_| fresh(rng, &mut names)).collect();
    let pick = |rng: &mut dyn rand::RngCore, pool: &[String]| -> String {
        if !pool.is_empty() && rng.gen_bool(0.8) {
            pool.choose(rng).unwrap().clone()
        } else {
            ident(rng)
        }
    };

    let mut elements = Vec::new();
    for name in &enum_names {
        let literals = (0..rng.gen_range(1..5))
            .map(|_| Ident { name: ident(rng), span: z() })
            .collect();
        elements.push(Element::Enum(EnumDef {
            name: name.clone(),
            literals,
            span: z(),
        }));
    }
    for name in &concept_names {
        let mut features = Vec::new();
        for _ in 0..rng.gen_range(0..6) {
            let fname = ident(rng);
            if rng.gen_bool(0.55) {
                let type_name = if rng.gen_bool(0.6) {
                    TypeName::Primitive(*PrimitiveType::ALL.choose(rng).unwrap())
                } else {
                    TypeName::Named(pick(rng, &enum_names))
                };
                let cardinality = *[Cardinality::One, Cardinality::Some, Cardinality::Lone].choose(rng).unwrap();
                features.push(Feature::Attribute(Attribute {
                    name: fname,
                    cardinality,
                    type_name,
                    type_span: z(),
                    is_id: rng.gen_bool(0.2),
                    default_value: rng.gen_bool(0.4).then(|| literal(rng)),
                    span: z(),
                }));
            } else {
                let cardinality = *[Cardinality::One, Cardinality::Some, Cardinality::Lone, Cardinality::Many]
                    .choose(rng)
                    .unwrap();
                let subset_of = rng.gen_bool(0.25).then(|| SubsetOf {
                    owner_name: pick(rng, &concept_names),
                    feature_name: ident(rng),
                    span: z(),
                });
                features.push(Feature::Reference(Reference {
                    name: fname,
                    cardinality,
                    arrow: if rng.gen() { ArrowKind::OneWay } else { ArrowKind::Bidirectional },
                    target: Ident { name: pick(rng, &concept_names), span: z() },
                    subset_of,
                    span: z(),
                }));
            }
        }
        elements.push(Element::Concept(ConceptDef {
            name: name.clone(),
            is_main: rng.gen_bool(0.3),
            extends_name: rng
                .gen_bool(0.3)
                .then(|| Ident { name: pick(rng, &concept_names), span: z() }),
            features,
            span: z(),
        }));
    }
    elements.shuffle(rng);
    DslModel {
        source_name: "<random>".into(),
        elements,
    }
}

pub fn seeded(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

// ------------------------------------------------------- grammar coverage

/// One fixture per construct of the language.
pub const GRAMMAR_COVERAGE: &[(&str, &str)] = &[
    ("main concept", "main concept Shop {\n    one name : string;\n}\n"),
    ("concept", "main concept M {\n}\nconcept Flavor {\n    one label : string;\n}\n"),
    ("enum", "enum Size { SMALL, MEDIUM, LARGE }\nmain concept M {\n    one size : Size;\n}\n"),
    ("one", "main concept M {\n    one a : int;\n    one r --> M;\n}\n"),
    ("some", "main concept M {\n    some tags : string;\n    some r --> M;\n}\n"),
    ("lone", "main concept M {\n    lone note : string;\n    lone r --> M;\n}\n"),
    ("-->", "main concept M {\n    owner --> P;\n}\nconcept P {\n}\n"),
    ("<>-->", "main concept M {\n    parts <>--> P;\n}\nconcept P {\n}\n"),
    ("isId", "main concept M {\n    one code : string isId;\n}\n"),
    (
        "subset of",
        "main concept Base {\n    some animals <>--> Animal;\n}\nconcept Animal {\n}\nconcept Dog extends Animal {\n}\nconcept Child extends Base {\n    some pets <>--> Dog subset of Base.animals;\n}\n",
    ),
    (
        "defaults",
        "enum E { A, B }\nmain concept M {\n    one s : string = \"x\";\n    one i : int = -3;\n    one f : float = 2.5;\n    one g : float = 2;\n    one b : bool = true;\n    one c : bool = false;\n    one e : E = B;\n    one d : date = \"2024-01-31\";\n}\n",
    ),
    ("extends", "main concept M {\n}\nconcept N extends M {\n}\n"),
    ("comments", "// line\n/* block\n   comment */ main concept M { one a : int; // trailing\n}\n"),
    ("empty model", ""),
];

// ----------------------------------------------------- validator fixtures

/// Minimal model per semantic code; each triggers only that ERROR code.
pub const VALIDATOR_FIXTURES: &[(DiagnosticCode, &str)] = &[
    (DiagnosticCode::V101, "main concept A { one x : Foo; }"),
    (DiagnosticCode::V102, "main concept A { owner --> Person; }"),
    (DiagnosticCode::V201, "main concept A extends B { }"),
    (DiagnosticCode::V202, "enum E { X } main concept A extends E { }"),
    (DiagnosticCode::V203, "main concept A extends A { }"),
    (DiagnosticCode::V204, "main concept M { } concept A extends B { } concept B extends A { }"),
    (
        DiagnosticCode::V301,
        "main concept A { items --> B; } concept B { } concept C extends A { sub --> B subset of A.nothing; }",
    ),
    (
        DiagnosticCode::V302,
        "main concept A { items --> B; } concept B { } concept C { sub --> B subset of A.items; }",
    ),
    (
        DiagnosticCode::V303,
        "main concept A { items --> B; } concept B { } concept D { } concept C extends A { sub --> D subset of A.items; }",
    ),
    (
        DiagnosticCode::V304,
        "main concept A { lone item --> B; } concept B { } concept C extends A { some sub --> B subset of A.item; }",
    ),
    (DiagnosticCode::V401, "main concept A { } concept A { }"),
    (DiagnosticCode::V402, "main concept A { one x : int; one x : string; }"),
    (DiagnosticCode::V403, "enum E { X, X } main concept A { }"),
    (DiagnosticCode::V501, "concept A { }"),
    (DiagnosticCode::V502, "main concept A { } main concept B { }"),
    (DiagnosticCode::V601, "main concept A { one x : int = \"s\"; }"),
    (DiagnosticCode::V602, "enum E { X } main concept A { one e : E = Y; }"),
    (DiagnosticCode::V701, "enum E { X } main concept A { one e : E isId; }"),
    (DiagnosticCode::V702, "main concept A { lone x : string isId; }"),
    (
        DiagnosticCode::V703,
        "main concept A { one id : string isId; } concept B extends A { one code : string isId; }",
    ),
];

/// Models that must validate without any ERROR.
pub const VALID_CORPUS: &[(&str, &str)] = &[
    ("library", include_str!("../../data/example.dsl")),
    (
        "ice-cream-parlor",
        "enum Container { CUP, CONE }\nenum OrderStatus { PLACED, READY, PICKED_UP, CANCELLED }\n\nmain concept Parlor {\n    one name : string isId;\n    flavors <>--> Flavor;\n    orders <>--> Order;\n}\n\nconcept Flavor {\n    one name : string isId;\n    one pricePerScoop : float = 2.5;\n    lone allergens : string;\n    one vegan : bool = false;\n}\n\nconcept Order {\n    one number : int isId;\n    one status : OrderStatus = PLACED;\n    one placedAt : date;\n    some items <>--> Scoop;\n}\n\nconcept Scoop {\n    one container : Container = CUP;\n    one flavor --> Flavor;\n}\n",
    ),
    (
        "conference",
        "enum TicketType { STUDENT, REGULAR, SPONSOR }\n\nmain concept Conference {\n    one title : string isId;\n    one start : date;\n    some tracks <>--> Track;\n    rooms <>--> Room;\n}\n\nconcept Track {\n    one name : string;\n    sessions <>--> Session;\n}\n\nconcept Room {\n    one label : string isId;\n    one capacity : int = 50;\n}\n\nconcept Session {\n    one slot : date;\n    one room --> Room;\n    talks --> Talk;\n}\n\nconcept Talk {\n    one title : string;\n    some speakers --> Speaker;\n}\n\nconcept Person {\n    one email : string isId;\n    one name : string;\n}\n\nconcept Speaker extends Person {\n    lone bio : string;\n}\n\nconcept Attendee extends Person {\n    one ticket : TicketType = REGULAR;\n    agenda --> Session;\n}\n",
    ),
    (
        "subset-hierarchy",
        "main concept Zoo {\n    some animals <>--> Animal;\n    keepers <>--> Keeper;\n}\n\nconcept Animal {\n    one tag : string isId;\n}\n\nconcept Bird extends Animal {\n    one canFly : bool = true;\n}\n\nconcept Keeper {\n    one name : string;\n    lone favorite --> Animal;\n}\n\nconcept Aviary extends Zoo {\n    some birds <>--> Bird subset of Zoo.animals;\n}\n\nconcept Trainer extends Keeper {\n    lone star --> Bird subset of Keeper.favorite;\n}\n",
    ),
    (
        "vet-clinic",
        "enum Species { DOG, CAT, BIRD, OTHER }\n\nmain concept Clinic {\n    one name : string isId;\n    vets <>--> Vet;\n    owners <>--> Owner;\n}\n\nconcept Vet {\n    one license : string isId;\n    one name : string;\n}\n\nconcept Owner {\n    one phone : string isId;\n    pets <>--> Pet;\n}\n\nconcept Pet {\n    one name : string;\n    one species : Species = OTHER;\n    lone born : date;\n    visits <>--> Visit;\n}\n\nconcept Visit {\n    one on : date;\n    one vet --> Vet;\n    lone invoice <>--> Invoice;\n}\n\nconcept Invoice {\n    one number : int isId;\n    one amount : float = 0;\n}\n",
    ),
    (
        "bike-share",
        "enum Plan { PAY_AS_YOU_GO, MONTHLY, ANNUAL }\n\nmain concept City {\n    one name : string isId;\n    stations <>--> Station;\n    riders <>--> Rider;\n}\n\nconcept Station {\n    one code : string isId;\n    one docks : int = 20;\n    bikes --> Bike;\n}\n\nconcept Bike {\n    one serial : string isId;\n    one needsRepair : bool = false;\n}\n\nconcept Rider {\n    one email : string isId;\n    one plan : Plan = PAY_AS_YOU_GO;\n    trips <>--> Trip;\n}\n\nconcept Trip {\n    one from --> Station;\n    lone to --> Station;\n    one bike --> Bike;\n    one minutes : int;\n    one fare : float;\n}\n",
    ),
    (
        "blog",
        "main concept Blog {\n    one slug : string isId;\n    posts <>--> Post;\n}\n\nconcept Post {\n    one title : string;\n    one published : bool = false;\n    some tags : string;\n    comments <>--> Comment;\n    one author --> Author;\n}\n\nconcept Comment {\n    one body : string;\n    lone replyTo --> Comment;\n}\n\nconcept Author {\n    one handle : string isId;\n}\n",
    ),
    (
        "inventory",
        "enum Unit { PIECE, KG, LITRE }\n\nmain concept Warehouse {\n    one code : string isId;\n    some bins <>--> Bin;\n}\n\nconcept Bin {\n    one label : string isId;\n    stock <>--> StockItem;\n}\n\nconcept Product {\n    one sku : string isId;\n    one unit : Unit = PIECE;\n    lone weight : float;\n}\n\nconcept StockItem {\n    one product --> Product;\n    one quantity : int = 0;\n}\n\nconcept Shelf extends Bin {\n    one level : int = 1;\n}\n",
    ),
    (
        "university",
        "main concept University {\n    one name : string isId;\n    departments <>--> Department;\n}\n\nconcept Department {\n    one code : string isId;\n    courses <>--> Course;\n    staff <>--> Lecturer;\n}\n\nconcept Course {\n    one code : string isId;\n    one credits : int = 5;\n    lone lecturer --> Lecturer;\n    students --> Student;\n}\n\nconcept Member {\n    one id : int isId;\n    one name : string;\n}\n\nconcept Lecturer extends Member {\n}\n\nconcept Student extends Member {\n    one enrolled : date;\n}\n\nconcept Tutor extends Student {\n    lone assisted --> Course;\n}\n",
    ),
    (
        "recipes",
        "enum Difficulty { EASY, MEDIUM, HARD }\n\nmain concept Cookbook {\n    one title : string isId;\n    recipes <>--> Recipe;\n}\n\nconcept Recipe {\n    one name : string;\n    one difficulty : Difficulty = EASY;\n    one minutes : int;\n    some steps : string;\n    ingredients <>--> Ingredient;\n}\n\nconcept Ingredient {\n    one name : string;\n    lone amount : float;\n    lone unit : string = \"g\";\n}\n",
    ),
    (
        "commented",
        "// generated with commentary the extractor missed\nmain concept Event {\n    one name : string isId; // identifier\n    /* when it happens */\n    one when : date;\n    lone venue --> Venue;\n}\n\nconcept Venue { one name : string; }\n",
    ),
];

// --------------------------------------------------- corrupted fixtures

/// Syntax fixtures with a single injected corruption. `$` marks where the
/// diagnostic must point and is removed before parsing.
pub const CORRUPTED: &[(&str, DiagnosticCode)] = &[
    ("main concept A {\n    one name : string\n$}\n", DiagnosticCode::E103),
    ("main concept A {\n    one a : string\n    $one b : int;\n}\n", DiagnosticCode::E103),
    ("main concept A {\n    owner --> B\n    $lone c : int;\n}\n", DiagnosticCode::E103),
    ("main concept A {\n    one a $@ string;\n}\n", DiagnosticCode::E001),
    ("main concept A {\n    one a : string isId $isId;\n}\n", DiagnosticCode::E101),
    ("main concept A {\n    one $concept : string;\n}\n", DiagnosticCode::E101),
    ("main concept A {\n    one a $string;\n}\n", DiagnosticCode::E101),
    ("main concept A {\n    one a : string = $\"abc;\n}\n", DiagnosticCode::E002),
    ("main concept A {\n}\n$/* never closed\n", DiagnosticCode::E003),
    ("main concept A {\n    one a : string;\n$", DiagnosticCode::E102),
    ("enum E { A, B, $}\n", DiagnosticCode::E101),
    ("enum E { $}\n", DiagnosticCode::E101),
    ("main concept A $one a : string; }\n", DiagnosticCode::E101),
    ("main concept A extends ${ }\n", DiagnosticCode::E101),
    (
        "main concept A {\n    items --> B;\n}\nconcept B {\n    sub --> B subset of A $items;\n}\n",
        DiagnosticCode::E101,
    ),
    ("main concept A {\n    one a : int = $;\n}\n", DiagnosticCode::E101),
    ("main $main concept A {\n}\n", DiagnosticCode::E101),
    ("main concept A {\n}\n$}\n", DiagnosticCode::E101),
    ("main concept A {\n    one a : float = 1.2$.3;\n}\n", DiagnosticCode::E101),
    ("main concept A {\n    one a : string = \"héllo 日本\" $isId;\n}\n", DiagnosticCode::E101),
    ("main concept A {\r\n    one a : string\r\n$}\r\n", DiagnosticCode::E103),
    ("main concept A {\n    owner $-> B;\n}\n", DiagnosticCode::E001),
    ("main concept $Äö {\n}\n", DiagnosticCode::E001),
];

/// Source with the marker removed, and the marker's 1-based line and
/// character column. Counts `\n` only, so a `\r` before a line break
/// stays part of the preceding line.
pub fn locate_marker(fixture: &str) -> (String, u32, u32) {
    let at = fixture.find('$').expect("fixture has a marker");
    let before = &fixture[..at];
    let line = before.matches('\n').count() as u32 + 1;
    let line_start = before.rfind('\n').map_or(0, |i| i + 1);
    let column = before[line_start..].chars().count() as u32 + 1;
    let source = format!("{}{}", before, &fixture[at + 1..]);
    (source, line, column)
}

// ------------------------------------------------------ bookkeeping data

/// Models shown as producing at least one syntactically valid output in
/// the published results.
pub const VALID_MODELS: [&str; 26] = [
    "granite3-moe:3b",
    "granite3-moe:latest",
    "olmo2:13b",
    "notus:latest",
    "dolphin-mistral:latest",
    "dolphin3:latest",
    "codellama:13b",
    "codellama:latest",
    "llama2:latest",
    "mistral:latest",
    "mistral:7b-instruct",
    "llama3.1:latest",
    "openthinker:latest",
    "qwen2.5-coder:14b",
    "qwen2.5-coder:1.5b",
    "qwen2.5-coder:latest",
    "qwen2.5-coder:3b",
    "deepseek-r1:14b",
    "deepseek-r1:latest",
    "qwen2.5:latest",
    "phi3:14b",
    "phi3:latest",
    "phi4:latest",
    "gemma:latest",
    "gemma3:4b",
    "gemma3:12b",
];

pub const VALID_DSL: &str = "```\nmain concept Parlor {\n    one name : string isId;\n    flavors <>--> Flavor;\n}\n\nconcept Flavor {\n    one name : string isId;\n}\n```";
pub const SYNTAX_INVALID_DSL: &str = "main concept Parlor {\n    one name : string\n}\n";

/// Replay script: models in `valid` answer [invalid, valid]; every other
/// model answers invalid for all attempts.
pub fn bookkeeping_script(models: &[String], valid: &[&str], attempts: usize) -> dslgen::llm::ReplayScript {
    models
        .iter()
        .map(|m| {
            let answers = if valid.contains(&m.as_str()) {
                vec![SYNTAX_INVALID_DSL, VALID_DSL]
            } else {
                vec![SYNTAX_INVALID_DSL; attempts]
            };
            (m.clone(), answers.into_iter().map(Into::into).collect())
        })
        .collect()
}

/// Like `bookkeeping_script`, repeated once per scenario.
pub fn matrix_script(models: &[String], valid: &[&str], attempts: usize, scenarios: usize) -> dslgen::llm::ReplayScript {
    bookkeeping_script(models, valid, attempts)
        .into_iter()
        .map(|(m, answers)| {
            let all = (0..scenarios).flat_map(|_| answers.iter().cloned()).collect();
            (m, all)
        })
        .collect()
}

// ---------------------------------------------------------------- http

/// One request through the rating router on a throwaway runtime.
pub fn http_call(
    service: &std::sync::Arc<dslgen::rating::RatingService>,
    method: &str,
    uri: &str,
    body: Option<serde_json::Value>,
) -> (u16, serde_json::Value) {
    use axum::body::Body;
    use http_body_util::BodyExt;
    use tower::ServiceExt;

    let req = axum::http::Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or(Body::empty(), |b| Body::from(b.to_string())))
        .unwrap();
    let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
    rt.block_on(async {
        let resp = dslgen::rating::router(service.clone()).oneshot(req).await.unwrap();
        let status = resp.status().as_u16();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        let value = if bytes.is_empty() {
            serde_json::Value::Null
        } else {
            serde_json::from_slice(&bytes).unwrap()
        };
        (status, value)
    })
}

pub fn rater_body() -> serde_json::Value {
    serde_json::json!({
        "age_band": "25-34",
        "gender": "female",
        "dsl_experience": "BASIC",
        "llm_usage_frequency": "WEEKLY"
    })
}

pub fn rating_body(task_id: &str, output_id: &str, rater_id: &str, scores: [i64; 4]) -> serde_json::Value {
    serde_json::json!({
        "task_id": task_id,
        "output_id": output_id,
        "rater_id": rater_id,
        "scores": {
            "semantic_correctness": scores[0],
            "concept_identification": scores[1],
            "completeness": scores[2],
            "advanced_features": scores[3]
        }
    })
}

/// Registry entries at or below 8B parameters, transcribed from the
/// published model table. `deepseek-r1:8b` sits exactly on the bound.
pub const SMALL_MODELS: [&str; 30] = [
    "granite3-moe:3b",
    "granite3-moe:latest",
    "olmo2:latest",
    "notus:latest",
    "dolphin-mistral:latest",
    "dolphin3:latest",
    "tinyllama:latest",
    "codellama:latest",
    "llama3.2:1b",
    "llama3:latest",
    "llama3.2:latest",
    "llama2:latest",
    "mistral:latest",
    "mistral:7b-instruct",
    "llama3.1:latest",
    "deepseek-r1:8b",
    "stable-code:latest",
    "openthinker:latest",
    "qwen2.5-coder:0.5b",
    "qwen2.5-coder:1.5b",
    "qwen2.5-coder:latest",
    "qwen2.5-coder:3b",
    "deepseek-r1:latest",
    "qwen2.5:latest",
    "deepseek-r1:1.5b",
    "phi:latest",
    "phi3:latest",
    "gemma:2b",
    "gemma3:4b",
    "gemma3:1b",
];
