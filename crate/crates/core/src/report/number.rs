/// One decimal place, halves rounded away from zero.
///
/// A binary float lies exactly halfway between two one-decimal values only
/// when four times its magnitude is an odd integer; everything else is
/// rounded correctly by the standard formatter.
pub fn format_score(x: f64) -> String {
    let quad = x.abs() * 4.0;
    let s = if quad.fract() == 0.0 && quad % 2.0 == 1.0 {
        format!("{:.1}", (x * 10.0).round() / 10.0)
    } else {
        format!("{x:.1}")
    };
    if s == "-0.0" {
        "0.0".to_string()
    } else {
        s
    }
}

pub fn latex_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' | '%' | '$' | '#' | '_' | '{' | '}' => {
                out.push('\\');
                out.push(c);
            }
            '~' => out.push_str("\\textasciitilde{}"),
            '^' => out.push_str("\\textasciicircum{}"),
            '\\' => out.push_str("\\textbackslash{}"),
            _ => out.push(c),
        }
    }
    out
}

/// Escapes a Markdown table cell.
pub fn md_escape(s: &str) -> String {
    s.replace('|', "\\|")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halves_round_away_from_zero() {
        assert_eq!(format_score(0.25), "0.3");
        assert_eq!(format_score(-0.25), "-0.3");
        assert_eq!(format_score(2.75), "2.8");
        assert_eq!(format_score(0.75), "0.8");
        assert_eq!(format_score(104.9), "104.9");
        assert_eq!(format_score(-152.65), "-152.7");
    }

    #[test]
    fn non_ties_round_to_nearest() {
        assert_eq!(format_score(0.35), "0.3");
        assert_eq!(format_score(0.15), "0.1");
        assert_eq!(format_score(74.96), "75.0");
        assert_eq!(format_score(-0.04), "0.0");
        assert_eq!(format_score(60.9499), "60.9");
    }

    #[test]
    fn escapes() {
        assert_eq!(latex_escape("A_B & 50%"), "A\\_B \\& 50\\%");
        assert_eq!(md_escape("a|b"), "a\\|b");
    }
}
