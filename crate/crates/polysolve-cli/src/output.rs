//! Machine-readable output: the root report as JSON or CSV, and Macaulay
//! matrices as CSV. Every number is printed with 17 significant digits, which
//! reproduces the underlying double exactly, and all orderings are inherited
//! from the solver, so repeated runs emit identical bytes.

use num_complex::Complex64;
use polysolve::macaulay::MacaulayMatrix;
use polysolve::solve::SolveReport;

use crate::input::format_monomial;

/// A block chart coordinate below this modulus counts as zero, so the
/// dehomogenized view of the block is reported as absent.
pub const CHART_EPS: f64 = 1e-8;

/// 17 significant digits in scientific form; every distinct double gets a
/// distinct, reparseable text.
pub fn fmt_sig(v: f64) -> String {
    let normalized = if v == 0.0 { 0.0 } else { v };
    format!("{normalized:.16e}")
}

/// JSON number token: non-finite values have no JSON form and become null.
fn json_number(v: f64) -> String {
    if v.is_finite() {
        fmt_sig(v)
    } else {
        "null".into()
    }
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn json_complex(z: Complex64) -> String {
    format!("{{\"re\": {}, \"im\": {}}}", json_number(z.re), json_number(z.im))
}

fn json_complex_list(zs: &[Complex64]) -> String {
    let items: Vec<String> = zs.iter().map(|&z| json_complex(z)).collect();
    format!("[{}]", items.join(", "))
}

/// Consecutive coordinate ranges covering the projective blocks.
fn block_ranges(sizes: &[usize]) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::with_capacity(sizes.len());
    let mut start = 0;
    for &s in sizes {
        out.push(start..start + s);
        start += s;
    }
    out
}

/// The whole solve report as a JSON document.
pub fn solve_json(report: &SolveReport) -> String {
    let set = &report.roots;
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"mode\": {},\n", json_string(set.mode.as_str())));
    out.push_str(&format!("  \"seed\": {},\n", set.seed));
    out.push_str(&format!("  \"delta\": {},\n", set.delta));
    out.push_str("  \"roots\": [\n");
    for (k, root) in set.roots.iter().enumerate() {
        out.push_str("    {\n");
        out.push_str(&format!(
            "      \"coords\": {},\n",
            json_complex_list(&root.coordinates)
        ));
        if let Some(sizes) = &set.block_sizes {
            let mut blocks = Vec::with_capacity(sizes.len());
            for range in block_ranges(sizes) {
                let coords = &root.coordinates[range];
                let chart = coords[0];
                let affine = if chart.norm() > CHART_EPS {
                    let values: Vec<Complex64> =
                        coords[1..].iter().map(|&c| c / chart).collect();
                    json_complex_list(&values)
                } else {
                    "null".into()
                };
                blocks.push(format!(
                    "{{\"coords\": {}, \"affine\": {}}}",
                    json_complex_list(coords),
                    affine
                ));
            }
            out.push_str(&format!("      \"blocks\": [{}],\n", blocks.join(", ")));
        }
        out.push_str(&format!("      \"multiplicity\": {},\n", root.multiplicity));
        out.push_str(&format!("      \"residual\": {}\n", json_number(root.residual)));
        out.push_str(if k + 1 < set.roots.len() { "    },\n" } else { "    }\n" });
    }
    out.push_str("  ],\n");
    let t = &set.timings;
    out.push_str(&format!(
        "  \"timings\": {{\"t_M\": {}, \"t_N\": {}, \"t_B\": {}, \"t_S\": {}, \"t_alg\": {}}},\n",
        json_number(t.t_matrix),
        json_number(t.t_null),
        json_number(t.t_basis),
        json_number(t.t_schur),
        json_number(report.t_total)
    ));
    let warnings: Vec<String> = set.warnings.iter().map(|w| json_string(w)).collect();
    out.push_str(&format!(
        "  \"diagnostics\": {{\"gap\": {}, \"cond_nstar\": {}, \"matrix_rows\": {}, \
         \"matrix_cols\": {}, \"warnings\": [{}]}}\n",
        json_number(report.gap),
        json_number(report.cond_nstar),
        report.matrix_shape.0,
        report.matrix_shape.1,
        warnings.join(", ")
    ));
    out.push_str("}\n");
    out
}

/// Coordinate labels for tabular output: the declared variable names, with a
/// `homK` chart coordinate prepended to each projective block.
pub fn coordinate_labels(vars: &[String], block_sizes: Option<&[usize]>) -> Vec<String> {
    let Some(sizes) = block_sizes else {
        return vars.to_vec();
    };
    let mut labels = Vec::with_capacity(vars.len() + sizes.len());
    let mut next = 0;
    for (k, &s) in sizes.iter().enumerate() {
        labels.push(format!("hom{}", k + 1));
        for _ in 1..s {
            labels.push(vars[next].clone());
            next += 1;
        }
    }
    labels
}

/// The root list as CSV: one row per root, one re/im column pair per
/// coordinate, then the multiplicity and optionally the residual.
pub fn solve_csv(report: &SolveReport, labels: &[String], emit_residuals: bool) -> String {
    let mut header: Vec<String> = labels
        .iter()
        .flat_map(|l| [format!("re({l})"), format!("im({l})")])
        .collect();
    header.push("multiplicity".into());
    if emit_residuals {
        header.push("residual".into());
    }
    let mut out = header.join(",");
    out.push('\n');
    for root in &report.roots.roots {
        let mut fields: Vec<String> = root
            .coordinates
            .iter()
            .flat_map(|z| [fmt_sig(z.re), fmt_sig(z.im)])
            .collect();
        fields.push(root.multiplicity.to_string());
        if emit_residuals {
            fields.push(fmt_sig(root.residual));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// One complex entry in `a+bi` form with full precision.
pub fn fmt_complex(z: Complex64) -> String {
    let im = if z.im == 0.0 { 0.0 } else { z.im };
    let sign = if im < 0.0 { '-' } else { '+' };
    format!("{}{}{}i", fmt_sig(z.re), sign, fmt_sig(im.abs()))
}

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// The Macaulay matrix as CSV: the header labels every column as
/// `(i, multiplier)` for generator i, the first column holds the row
/// monomials, and entries are `a+bi` with full precision. Output depends
/// only on the matrix, so identical builds dump identical bytes.
pub fn matrix_csv(mac: &MacaulayMatrix, labels: &[String]) -> String {
    let display = |exps: &[i32]| -> String {
        let text = format_monomial(exps, labels);
        if text.is_empty() {
            "1".into()
        } else {
            text
        }
    };
    let mut header = vec!["monomial".to_string()];
    for col in &mac.columns {
        header.push(csv_quote(&format!(
            "({}, {})",
            col.generator + 1,
            display(&col.multiplier)
        )));
    }
    let mut out = header.join(",");
    out.push('\n');
    for r in 0..mac.rows.len() {
        let mut fields = vec![display(mac.rows.monomial(r))];
        for c in 0..mac.columns.len() {
            fields.push(fmt_complex(mac.entries[(r, c)]));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use polysolve::linalg::c64;
    use polysolve::macaulay::{dense_macaulay, DEFAULT_MAX_ENTRIES};
    use polysolve::poly::{Polynomial, PolynomialSystem, Term};
    use polysolve::solve::{solve, SolveConfig};
    use polysolve::Mode;

    fn p(nvars: usize, terms: &[(f64, &[i32])]) -> Polynomial {
        Polynomial::new(
            nvars,
            terms
                .iter()
                .map(|&(c, e)| Term { coeff: c64(c, 0.0), exps: e.to_vec() })
                .collect(),
        )
    }

    fn univariate_report() -> SolveReport {
        let f = p(1, &[(1.0, &[2]), (-3.0, &[1]), (2.0, &[0])]);
        let system = PolynomialSystem::new(vec![f]).unwrap();
        solve(&system, &SolveConfig::default()).unwrap()
    }

    #[test]
    fn fmt_sig_round_trips_and_normalizes_zero() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 123456789.12345, f64::MIN_POSITIVE] {
            assert_eq!(fmt_sig(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_sig(-0.0), fmt_sig(0.0));
        assert_eq!(fmt_sig(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn fmt_complex_is_sign_stable() {
        assert_eq!(fmt_complex(c64(1.0, 0.0)), "1.0000000000000000e0+0.0000000000000000e0i");
        assert_eq!(fmt_complex(c64(0.0, -0.0)), "0.0000000000000000e0+0.0000000000000000e0i");
        assert!(fmt_complex(c64(-2.0, -0.5)).ends_with("-5.0000000000000000e-1i"));
    }

    #[test]
    fn json_report_has_the_stable_field_layout() {
        let json = solve_json(&univariate_report());
        for key in [
            "\"mode\": \"affine\"",
            "\"seed\": 7",
            "\"delta\": 2",
            "\"coords\": [",
            "\"multiplicity\": 1",
            "\"residual\": ",
            "\"t_M\": ",
            "\"t_alg\": ",
            "\"gap\": ",
            "\"cond_nstar\": ",
            "\"warnings\": []",
        ] {
            assert!(json.contains(key), "missing {key} in {json}");
        }
        // Corner-mode roots carry no per-block view.
        assert!(!json.contains("\"blocks\""));
    }

    #[test]
    fn json_blocks_carry_the_affine_view_when_the_chart_is_usable() {
        // One root at x = 2 (chart usable) and one at infinity (chart null).
        let f1 = p(2, &[(2.0, &[0, 0]), (-1.0, &[1, 0]), (2.0, &[0, 1]), (2.0, &[1, 1])]);
        let f2 = p(2, &[(4.0, &[0, 0]), (-2.0, &[1, 0]), (1.0, &[0, 1]), (4.0, &[1, 1])]);
        let system = PolynomialSystem::new(vec![f1, f2]).unwrap();
        let cfg = SolveConfig {
            mode: Mode::Multihom,
            blocks: Some(vec![1, 1]),
            ..SolveConfig::default()
        };
        let report = solve(&system, &cfg).unwrap();
        let json = solve_json(&report);
        assert!(json.contains("\"blocks\": [{\"coords\": ["));
        assert!(json.contains("\"affine\": null"));
        assert!(json.contains("\"affine\": [{"));
    }

    #[test]
    fn csv_layout_matches_the_labels_and_flags() {
        let report = univariate_report();
        let labels = vec!["x".to_string()];
        let with = solve_csv(&report, &labels, true);
        let mut lines = with.lines();
        assert_eq!(lines.next().unwrap(), "re(x),im(x),multiplicity,residual");
        assert_eq!(lines.clone().count(), 2);
        for row in lines {
            let fields: Vec<&str> = row.split(',').collect();
            assert_eq!(fields.len(), 4);
            let re: f64 = fields[0].parse().unwrap();
            assert!((re - 1.0).abs() <= 1e-9 || (re - 2.0).abs() <= 1e-9);
            assert_eq!(fields[2], "1");
            assert!(fields[3].parse::<f64>().unwrap() <= 1e-10);
        }
        let without = solve_csv(&report, &labels, false);
        assert!(without.lines().next().unwrap().ends_with("multiplicity"));
    }

    #[test]
    fn coordinate_labels_insert_one_chart_per_block() {
        let vars = vec!["x".to_string(), "y".to_string(), "z".to_string()];
        assert_eq!(coordinate_labels(&vars, None), vars);
        assert_eq!(
            coordinate_labels(&vars, Some(&[4])),
            vec!["hom1", "x", "y", "z"]
        );
        assert_eq!(
            coordinate_labels(&vars, Some(&[2, 3])),
            vec!["hom1", "x", "hom2", "y", "z"]
        );
    }

    #[test]
    fn matrix_csv_prints_quoted_labels_and_full_entries() {
        let f = p(1, &[(1.0, &[1]), (-3.0, &[0])]);
        let system = PolynomialSystem::new(vec![f]).unwrap();
        let mac = dense_macaulay(&system, DEFAULT_MAX_ENTRIES).unwrap();
        let labels = vec!["x".to_string()];
        let csv = matrix_csv(&mac, &labels);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "monomial,\"(1, 1)\"");
        assert_eq!(lines[1], format!("1,{}", fmt_complex(c64(-3.0, 0.0))));
        assert_eq!(lines[2], format!("x,{}", fmt_complex(c64(1.0, 0.0))));
        // Determinism: a second build prints identical bytes.
        let again = matrix_csv(&dense_macaulay(&system, DEFAULT_MAX_ENTRIES).unwrap(), &labels);
        assert_eq!(csv, again);
    }
}
