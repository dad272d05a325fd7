import * as fs from "fs";
import * as path from "path";
import { describe, expect, it } from "vitest";

import { aggregateByPolicy, downsample } from "../src/aggregate.js";
import { parseTraceCsv } from "../src/schema.js";

const FIXTURE = path.join(__dirname, "fixtures", "traces_3runs.csv");
const GOLDEN = path.join(__dirname, "fixtures", "golden_means.json");

function loadFixtureSeries() {
    const rows = parseTraceCsv(fs.readFileSync(FIXTURE, "utf8"));
    return aggregateByPolicy(rows);
}

describe("aggregateByPolicy", () => {
    it("reproduces the golden per-round means to 1e-9", () => {
        const golden = JSON.parse(fs.readFileSync(GOLDEN, "utf8")) as Record<
            string,
            { t: number[]; mean: number[] }
        >;
        const series = loadFixtureSeries();
        expect(series.map((s) => s.policy).sort()).toEqual(Object.keys(golden).sort());
        for (const s of series) {
            const want = golden[s.policy];
            expect(s.t).toEqual(want.t);
            expect(s.nRuns).toBe(3);
            for (let i = 0; i < want.t.length; i++) {
                expect(Math.abs(s.mean[i] - want.mean[i])).toBeLessThanOrEqual(1e-9);
            }
        }
    });

    it("computes zero-width bands for a single run", () => {
        const rows = parseTraceCsv(fs.readFileSync(FIXTURE, "utf8")).filter(
            (r) => r.runKey === "0:0",
        );
        for (const s of aggregateByPolicy(rows)) {
            expect(s.nRuns).toBe(1);
            expect(s.stderr.every((v) => v === 0)).toBe(true);
        }
    });

    it("filters policies when asked", () => {
        const rows = parseTraceCsv(fs.readFileSync(FIXTURE, "utf8"));
        const series = aggregateByPolicy(rows, ["ucb"]);
        expect(series.map((s) => s.policy)).toEqual(["ucb"]);
    });

    it("standard errors match the sample-stddev formula", () => {
        const rows = parseTraceCsv(fs.readFileSync(FIXTURE, "utf8"));
        const target = rows.filter((r) => r.policy === "ucb" && r.t === 40);
        const values = target.map((r) => r.cumRegret);
        const mean = values.reduce((a, b) => a + b, 0) / values.length;
        const sd = Math.sqrt(
            values.reduce((a, b) => a + (b - mean) * (b - mean), 0) / (values.length - 1),
        );
        const series = aggregateByPolicy(rows).find((s) => s.policy === "ucb")!;
        const idx = series.t.indexOf(40);
        expect(series.stderr[idx]).toBeCloseTo(sd / Math.sqrt(values.length), 12);
    });
});

describe("downsample", () => {
    it("caps the point count and keeps endpoints", () => {
        const t = Array.from({ length: 2000 }, (_, i) => i + 1);
        const series = {
            policy: "p",
            t,
            mean: t.map((v) => v * 0.5),
            stderr: t.map(() => 0.1),
            nRuns: 2,
        };
        const down = downsample(series, 500);
        expect(down.t.length).toBe(500);
        expect(down.t[0]).toBe(1);
        expect(down.t[down.t.length - 1]).toBe(2000);
        expect(down.mean[0]).toBe(0.5);
    });

    it("is the identity below the cap", () => {
        const series = loadFixtureSeries()[0];
        expect(downsample(series, 500)).toBe(series);
    });
});
