//! Recovers DSL text from raw model output.

const LEADING_KEYWORDS: &[&str] = &["main", "concept", "enum"];

/// Returns the text the parser should see.
///
/// If the output contains a fenced code block, only the first block's body
/// is kept (its language tag is ignored). Leading and trailing lines that
/// carry no DSL token are then dropped. Interior lines are never touched.
pub fn extract_dsl(raw: &str) -> String {
    let body = first_fence(raw).unwrap_or(raw);
    strip_prose(body).to_string()
}

fn is_fence(line: &str) -> bool {
    line.trim_start().starts_with("```")
}

fn first_fence(raw: &str) -> Option<&str> {
    let mut offset = 0;
    let mut open: Option<usize> = None;
    for line in raw.split_inclusive('\n') {
        let next = offset + line.len();
        if is_fence(line) {
            match open {
                None => open = Some(next),
                Some(start) => return Some(&raw[start..offset]),
            }
        }
        offset = next;
    }
    open.map(|start| &raw[start.min(raw.len())..])
}

/// Whether a line plausibly belongs to a DSL document.
pub fn is_dsl_line(line: &str) -> bool {
    if ["{", "}", ";", "-->"].iter().any(|p| line.contains(p)) {
        return true;
    }
    line.split_whitespace()
        .next()
        .is_some_and(|w| LEADING_KEYWORDS.contains(&w))
}

fn strip_prose(text: &str) -> &str {
    let mut first: Option<usize> = None;
    let mut last_end = 0;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let content = line.trim_end_matches(['\n', '\r']);
        if is_dsl_line(content) {
            if first.is_none() {
                first = Some(offset);
            }
            last_end = offset + content.len();
        }
        offset += line.len();
    }
    match first {
        Some(start) => &text[start..last_end],
        None => "",
    }
}
