//! CSV rendering. Numbers are formatted by hand so the output does not
//! depend on locale; records end in a bare LF.

use csv::{Terminator, WriterBuilder};
use qtemplate_core::{DiscriminationReport, MatchOutcome, SampledResult, SecondTryOutcome, SweepTable};

pub const SWEEP_HEADER: [&str; 10] = [
    "noise_level",
    "image_label",
    "template_label",
    "filtered",
    "p_accept_mean",
    "p_accept_stderr",
    "second_try_accept_mean",
    "inconclusive_mean",
    "trials",
    "seed",
];

pub const DISCRIMINATION_HEADER: [&str; 10] = [
    "noise_level",
    "filtered",
    "p_a",
    "p_b",
    "helstrom_bound",
    "algorithm_error",
    "naive_projector_error_a",
    "naive_projector_error_b",
    "extended_error",
    "p_inconclusive",
];

/// Twelve decimals; rounding residue below the last digit prints as zero
/// rather than `-0.000000000000`.
fn fixed(x: f64) -> String {
    let s = format!("{x:.12}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn write_records(records: Vec<Vec<String>>) -> Result<String, String> {
    let mut writer = WriterBuilder::new()
        .terminator(Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for record in records {
        writer.write_record(&record).map_err(|e| e.to_string())?;
    }
    let bytes = writer.into_inner().map_err(|e| e.to_string())?;
    String::from_utf8(bytes).map_err(|e| e.to_string())
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn match_csv(
    outcome: &MatchOutcome,
    with_second: bool,
    second: Option<&SecondTryOutcome>,
) -> Result<String, String> {
    let mut names = vec!["p_reflect", "p_filter", "p_accept", "iterations"];
    let mut row = vec![
        fixed(outcome.p_reflect),
        fixed(outcome.p_filter),
        fixed(outcome.p_accept),
        outcome.iterations.to_string(),
    ];
    if with_second {
        names.extend(["p_accept_second", "p_inconclusive"]);
        match second {
            Some(s) => row.extend([fixed(s.p_accept_second), fixed(s.p_inconclusive)]),
            // No rejection branch: the second test never runs.
            None => row.extend([String::new(), fixed(0.0)]),
        }
    }
    if let Some(sample) = outcome.sample {
        names.push("outcome");
        row.push(
            match sample.result {
                SampledResult::Absorbed => "absorbed",
                SampledResult::FilterRejected => "filter_rejected",
                SampledResult::Accepted => "accepted",
                SampledResult::Rejected => "rejected",
            }
            .to_string(),
        );
    }
    write_records(vec![header(&names), row])
}

pub fn sweep_csv(table: &SweepTable) -> Result<String, String> {
    let mut records = vec![header(&SWEEP_HEADER)];
    for r in &table.rows {
        records.push(vec![
            r.noise_level.to_string(),
            r.image.as_str().to_string(),
            r.template.as_str().to_string(),
            r.filtered.to_string(),
            fixed(r.p_accept_mean),
            fixed(r.p_accept_stderr),
            fixed(r.second_try_accept_mean),
            fixed(r.inconclusive_mean),
            r.trials.to_string(),
            r.seed.to_string(),
        ]);
    }
    write_records(records)
}

pub fn discrimination_csv(reports: &[DiscriminationReport]) -> Result<String, String> {
    let mut records = vec![header(&DISCRIMINATION_HEADER)];
    for r in reports {
        records.push(vec![
            r.noise_level.to_string(),
            r.filtered.to_string(),
            fixed(r.p_a),
            fixed(r.p_b),
            fixed(r.helstrom_bound),
            fixed(r.algorithm_error),
            fixed(r.naive_projector_error_a),
            fixed(r.naive_projector_error_b),
            fixed(r.extended_error),
            fixed(r.p_inconclusive),
        ]);
    }
    write_records(records)
}
