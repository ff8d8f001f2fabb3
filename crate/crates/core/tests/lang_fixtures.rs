//! Seeded error fixtures: every one must produce a diagnostic at exactly
//! the expected line and column.

use sdflow_core::{load_source, Diagnostic};

struct ErrorFixture {
    name: &'static str,
    text: &'static str,
    line: u32,
    column: u32,
    needle: &'static str,
}

const FIXTURES: &[ErrorFixture] = &[
    ErrorFixture {
        name: "lex_illegal_char",
        text: "param b = 1\naux c = 1 @ 2",
        line: 2,
        column: 11,
        needle: "illegal character",
    },
    ErrorFixture {
        name: "lex_unterminated_string",
        text: "param p = 1 units \"people",
        line: 1,
        column: 19,
        needle: "unterminated string",
    },
    ErrorFixture {
        // at end of file the diagnostic anchors on the last token
        name: "syntax_missing_close_brace",
        text: "stock S {\n  initial = 0\n",
        line: 2,
        column: 13,
        needle: "expected `}`",
    },
    ErrorFixture {
        name: "syntax_missing_equals",
        text: "aux a 3",
        line: 1,
        column: 7,
        needle: "expected `=`",
    },
    ErrorFixture {
        name: "syntax_bad_expression",
        text: "aux a = 1 +\naux b = 2",
        line: 2,
        column: 1,
        needle: "expected expression",
    },
    ErrorFixture {
        name: "syntax_unknown_decl",
        text: "constant k = 2",
        line: 1,
        column: 1,
        needle: "expected `dimension`",
    },
    ErrorFixture {
        name: "syntax_bad_overlay_verb",
        text: "param p = 1\nscenario s {\n  jump p at 5 to 2\n}",
        line: 3,
        column: 3,
        needle: "expected `switch`",
    },
    ErrorFixture {
        name: "semantic_undefined_reference",
        text: "flow f = q * 2",
        line: 1,
        column: 10,
        needle: "undefined reference `q`",
    },
    ErrorFixture {
        name: "semantic_aux_as_inflow",
        text: "aux a = 1\nstock S {\n  initial = 0\n  inflows = [a]\n}",
        line: 4,
        column: 14,
        needle: "kind mismatch",
    },
    ErrorFixture {
        name: "semantic_scalar_subscripted",
        text: "param p = 1\naux a = p[x]",
        line: 2,
        column: 9,
        needle: "scalar",
    },
    ErrorFixture {
        name: "semantic_missing_subscript",
        text: "dimension g { x, y }\nparam p[g] = 1\naux a = 2 * p",
        line: 3,
        column: 13,
        needle: "subscripted",
    },
    ErrorFixture {
        name: "semantic_wildcard_outside_context",
        text: "dimension g { x, y }\nparam p[g] = 1\naux a = p[*]",
        line: 3,
        column: 9,
        needle: "dimension mismatch",
    },
    ErrorFixture {
        name: "semantic_wrong_element",
        text: "dimension g { x, y }\nparam p[g] = 1\naux b = p[z]",
        line: 3,
        column: 9,
        needle: "not an element",
    },
    ErrorFixture {
        name: "semantic_duplicate_definition",
        text: "param k = 1\naux k = 2",
        line: 2,
        column: 1,
        needle: "duplicate definition",
    },
    ErrorFixture {
        name: "semantic_lookup_nonincreasing",
        text: "lookup f = [(0, 0), (0, 1)]",
        line: 1,
        column: 1,
        needle: "strictly increasing",
    },
    ErrorFixture {
        name: "semantic_overlay_on_stock",
        text: "stock S { initial = 1 }\nscenario s {\n  step S at 5 to 2\n}",
        line: 3,
        column: 3,
        needle: "not a parameter",
    },
];

fn diagnostics(text: &str) -> Vec<Diagnostic> {
    match load_source("fixture.sdm", text) {
        Ok(_) => Vec::new(),
        Err(diags) => diags,
    }
}

#[test]
fn every_seeded_fixture_reports_at_the_expected_position() {
    for fixture in FIXTURES {
        let diags = diagnostics(fixture.text);
        assert!(
            !diags.is_empty(),
            "{}: expected a diagnostic, got none",
            fixture.name
        );
        let hit = diags.iter().find(|d| {
            d.line == fixture.line && d.column == fixture.column && d.message.contains(fixture.needle)
        });
        assert!(
            hit.is_some(),
            "{}: wanted `{}` at {}:{}, got {:?}",
            fixture.name,
            fixture.needle,
            fixture.line,
            fixture.column,
            diags
        );
    }
}

#[test]
fn diagnostic_positions_stay_inside_the_source() {
    for fixture in FIXTURES {
        let lines: Vec<&str> = fixture.text.lines().collect();
        for d in diagnostics(fixture.text) {
            // one-past-the-end lines/columns are valid anchor points for
            // end-of-file diagnostics
            assert!(
                (d.line as usize) <= lines.len() + 1,
                "{}: line {} out of range",
                fixture.name,
                d.line
            );
            if let Some(line) = lines.get(d.line as usize - 1) {
                assert!(
                    (d.column as usize) <= line.chars().count() + 1,
                    "{}: column {} out of range on line {}",
                    fixture.name,
                    d.column,
                    d.line
                );
            }
        }
    }
}

#[test]
fn diagnostics_render_as_file_line_col() {
    let diags = diagnostics("aux a = 1 @ 2");
    assert_eq!(
        format!("{}", diags[0]),
        "fixture.sdm:1:11: error: illegal character `@`"
    );
}
