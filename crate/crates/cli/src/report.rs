//! Plain-text renderings of command results.

use std::collections::BTreeSet;
use std::fmt::Write;

use mtagd_core::designer::{
    decoder_chains, sharing_groups, ModuleRef, ModuleShareDecision, SharingGroups,
};
use mtagd_core::{classify, DesignReport, GraphStats, ModuleKind, Mtag, TaskId, Theta};

pub fn stats_text(s: &GraphStats) -> String {
    let hist = |h: &std::collections::BTreeMap<u32, usize>| {
        if h.is_empty() {
            return "(none)".to_string();
        }
        h.iter()
            .map(|(w, n)| format!("{w}:{n}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut out = format!("{s}\n");
    let _ = writeln!(out, "undirected_pairs={}", s.undirected_pairs);
    let _ = writeln!(out, "w_trans: {}", hist(&s.w_trans_histogram));
    let _ = writeln!(out, "w_share_e: {}", hist(&s.w_share_e_histogram));
    let _ = writeln!(out, "w_share_d: {}", hist(&s.w_share_d_histogram));
    out
}

fn join_modules<'a>(ms: impl IntoIterator<Item = &'a ModuleRef>) -> String {
    ms.into_iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

fn chain_text(chain: &[TaskId]) -> String {
    chain
        .iter()
        .map(|t| ModuleRef::decoder(t).to_string())
        .collect::<Vec<_>>()
        .join(" -> ")
}

fn groups_text(out: &mut String, groups: &SharingGroups) {
    if groups.iter().next().is_none() {
        out.push_str("sharing groups: (none)\n");
        return;
    }
    out.push_str("sharing groups:\n");
    for g in groups.iter() {
        let _ = writeln!(out, "  {{{}}}", join_modules(g));
    }
}

fn chains_text(out: &mut String, arch: &Mtag) {
    let chains = decoder_chains(arch);
    if chains.is_empty() {
        out.push_str("decoder chain: (none)\n");
    }
    for c in chains {
        let _ = writeln!(out, "decoder chain: {}", chain_text(&c));
    }
}

fn decision_line(a: &ModuleRef, b: &ModuleRef, d: &ModuleShareDecision) -> String {
    let checks = d
        .checks
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ");
    format!("  {a} ~ {b}: {checks}")
}

/// Report printed by `design` in text mode.
pub fn design_text(arch: &Mtag, report: &DesignReport) -> String {
    let mut out = String::new();
    let tasks: Vec<&str> = arch.tasks().iter().map(TaskId::as_str).collect();
    let _ = writeln!(out, "tasks: {}", tasks.join(", "));
    out.push_str(&report.plan.to_string());
    chains_text(&mut out, arch);

    let mut shared = Vec::new();
    let mut rejected = Vec::new();
    for d in &report.share_decisions {
        for (kind, m) in [
            (ModuleKind::Encoder, &d.encoder),
            (ModuleKind::Decoder, &d.decoder),
        ] {
            if m.checks.is_empty() {
                continue;
            }
            let (a, b) = match kind {
                ModuleKind::Encoder => (ModuleRef::encoder(&d.a), ModuleRef::encoder(&d.b)),
                ModuleKind::Decoder => (ModuleRef::decoder(&d.a), ModuleRef::decoder(&d.b)),
            };
            let line = if kind == ModuleKind::Decoder && !d.bidirectional {
                format!("  {a} ~ {b}: one-way transfer only")
            } else {
                decision_line(&a, &b, m)
            };
            if m.shared {
                shared.push((kind, line));
            } else {
                rejected.push(line);
            }
        }
    }
    // encoders first, then decoders
    shared.sort_by_key(|(kind, _)| *kind != ModuleKind::Encoder);
    let _ = writeln!(out, "shared ({}, policy {}):", shared.len(), report.policy);
    for (_, line) in &shared {
        let _ = writeln!(out, "{line}");
    }
    if !rejected.is_empty() {
        out.push_str("not shared:\n");
        for line in &rejected {
            let _ = writeln!(out, "{line}");
        }
    }
    groups_text(&mut out, &report.sharing_groups);
    let _ = writeln!(
        out,
        "classification: {} (theta {})",
        report.classification, report.theta
    );
    for w in &report.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

/// Summary of an architecture graph without a design report.
pub fn mtag_text(arch: &Mtag, theta: Theta) -> String {
    let mut out = String::new();
    let tasks: Vec<&str> = arch.tasks().iter().map(TaskId::as_str).collect();
    let _ = writeln!(out, "tasks: {}", tasks.join(", "));
    out.push_str("passes:\n");
    for p in arch.r_pass() {
        let _ = writeln!(out, "  {p}");
    }
    let shares: BTreeSet<_> = arch.r_share().iter().collect();
    if shares.is_empty() {
        out.push_str("shared: (none)\n");
    } else {
        out.push_str("shared:\n");
        for s in shares {
            let _ = writeln!(out, "  {s}");
        }
    }
    chains_text(&mut out, arch);
    groups_text(&mut out, &sharing_groups(arch));
    let _ = writeln!(
        out,
        "classification: {} (theta {theta})",
        classify(arch, theta)
    );
    out
}
