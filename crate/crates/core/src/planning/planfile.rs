use std::fmt::Write as _;

use super::search::{Plan, PlanStep};
use super::PlanError;

/// One `(action arg…)` per line and a final `; cost = N` line.
pub fn write_plan(plan: &Plan) -> String {
    let mut s = String::new();
    for st in &plan.steps {
        let _ = writeln!(s, "{st}");
    }
    let _ = writeln!(s, "; cost = {}", plan.cost);
    s
}

/// Reads the steps of a plan file; comment lines are skipped.
pub fn read_plan(text: &str) -> Result<Vec<PlanStep>, PlanError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split(';').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: &str| PlanError::PlanFile { line: i + 1, msg: msg.to_string() };
        let inner =
            line.strip_prefix('(').and_then(|l| l.strip_suffix(')')).ok_or_else(|| bad("expected `(action arg…)`"))?;
        let mut words = inner.split_whitespace().map(str::to_lowercase);
        let action = words.next().ok_or_else(|| bad("empty step"))?;
        if inner.contains(['(', ')']) {
            return Err(bad("nested parentheses"));
        }
        out.push(PlanStep { action, args: words.collect() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let p = Plan {
            steps: vec![
                PlanStep { action: "move".into(), args: vec!["a".into(), "b".into()] },
                PlanStep { action: "grasp".into(), args: vec![] },
            ],
            cost: 5.0,
        };
        let text = write_plan(&p);
        assert_eq!(text, "(move a b)\n(grasp)\n; cost = 5\n");
        assert_eq!(read_plan(&text).unwrap(), p.steps);
        assert!(matches!(read_plan("(a\n"), Err(PlanError::PlanFile { line: 1, .. })));
    }
}
