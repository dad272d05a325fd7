/**
 * Per-policy aggregation: mean and standard error of cumulative regret
 * across runs at every round, computed on the full data before any
 * downsampling.
 */

import type { TraceRow } from "./schema.js";

export interface PolicySeries {
    policy: string;
    t: number[];
    mean: number[];
    stderr: number[];
    nRuns: number;
}

export function aggregateByPolicy(
    rows: TraceRow[],
    policyFilter?: string[],
): PolicySeries[] {
    const wanted = policyFilter ? new Set(policyFilter) : null;
    const byPolicy = new Map<string, Map<number, number[]>>();
    const runsSeen = new Map<string, Set<string>>();
    for (const row of rows) {
        if (wanted && !wanted.has(row.policy)) continue;
        let byT = byPolicy.get(row.policy);
        if (!byT) {
            byT = new Map();
            byPolicy.set(row.policy, byT);
            runsSeen.set(row.policy, new Set());
        }
        runsSeen.get(row.policy)!.add(row.runKey);
        const bucket = byT.get(row.t);
        if (bucket) bucket.push(row.cumRegret);
        else byT.set(row.t, [row.cumRegret]);
    }
    const series: PolicySeries[] = [];
    for (const policy of [...byPolicy.keys()].sort()) {
        const byT = byPolicy.get(policy)!;
        const ts = [...byT.keys()].sort((a, b) => a - b);
        const mean: number[] = [];
        const stderr: number[] = [];
        for (const t of ts) {
            const values = byT.get(t)!;
            const m = values.reduce((acc, v) => acc + v, 0) / values.length;
            mean.push(m);
            if (values.length > 1) {
                const ss = values.reduce((acc, v) => acc + (v - m) * (v - m), 0);
                stderr.push(Math.sqrt(ss / (values.length - 1)) / Math.sqrt(values.length));
            } else {
                stderr.push(0);
            }
        }
        series.push({ policy, t: ts, mean, stderr, nRuns: runsSeen.get(policy)!.size });
    }
    return series;
}

/** Keep at most maxPoints evenly spaced samples (endpoints always kept). */
export function downsample(series: PolicySeries, maxPoints = 500): PolicySeries {
    const n = series.t.length;
    if (n <= maxPoints) return series;
    const idx: number[] = [];
    for (let k = 0; k < maxPoints; k++) {
        idx.push(Math.round((k * (n - 1)) / (maxPoints - 1)));
    }
    const pick = (xs: number[]) => idx.map((i) => xs[i]);
    return {
        policy: series.policy,
        t: pick(series.t),
        mean: pick(series.mean),
        stderr: pick(series.stderr),
        nRuns: series.nRuns,
    };
}
