import * as fs from "fs";
import * as os from "os";
import * as path from "path";
import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { main, parseArgs } from "../src/cli.js";
import { TRACE_COLUMNS } from "../src/schema.js";

const FIXTURE = path.join(__dirname, "fixtures", "traces_3runs.csv");

let tmpDir: string;
beforeEach(() => {
    tmpDir = fs.mkdtempSync(path.join(os.tmpdir(), "plotcli-"));
    vi.spyOn(console, "log").mockImplementation(() => {});
    vi.spyOn(console, "warn").mockImplementation(() => {});
    vi.spyOn(console, "error").mockImplementation(() => {});
});
afterEach(() => {
    fs.rmSync(tmpDir, { recursive: true, force: true });
    vi.restoreAllMocks();
});

describe("parseArgs", () => {
    it("parses the documented flags", () => {
        const args = parseArgs([
            "--in", "a.csv", "--in", "b.csv", "--out", "fig.svg",
            "--policies", "ucb,ts", "--band", "1.5", "--title", "hi",
        ]);
        expect(args.inputs).toEqual(["a.csv", "b.csv"]);
        expect(args.policies).toEqual(["ucb", "ts"]);
        expect(args.band).toBe(1.5);
    });

    it("rejects missing inputs", () => {
        expect(() => parseArgs(["--out", "x.svg"])).toThrow();
        expect(() => parseArgs(["--in", "a.csv"])).toThrow();
    });
});

describe("main", () => {
    it("renders one mean curve and one band per policy", () => {
        const out = path.join(tmpDir, "fig.svg");
        const code = main(["--in", FIXTURE, "--out", out]);
        expect(code).toBe(0);
        const svg = fs.readFileSync(out, "utf8");
        for (const policy of ["anytime-e2d", "ucb", "ts"]) {
            const means = svg.match(
                new RegExp(`<polyline class="mean" data-policy="${policy}"`, "g"),
            );
            expect(means, policy).toHaveLength(1);
            const bands = svg.match(
                new RegExp(`<polygon class="band" data-policy="${policy}"`, "g"),
            );
            expect(bands, policy).toHaveLength(1);
        }
        expect(svg).toContain("cumulative regret");
    });

    it("honors the policy subset", () => {
        const out = path.join(tmpDir, "fig.svg");
        expect(main(["--in", FIXTURE, "--out", out, "--policies", "ucb"])).toBe(0);
        const svg = fs.readFileSync(out, "utf8");
        expect(svg.match(/<polyline class="mean"/g)).toHaveLength(1);
    });

    it("exits nonzero on schema mismatch with diagnostics", () => {
        const bad = path.join(tmpDir, "bad.csv");
        fs.writeFileSync(bad, "time,regret\n1,2\n");
        const errors: string[] = [];
        vi.mocked(console.error).mockImplementation((msg: string) => {
            errors.push(String(msg));
        });
        const code = main(["--in", bad, "--out", path.join(tmpDir, "x.svg")]);
        expect(code).toBe(1);
        expect(errors.join("\n")).toContain(TRACE_COLUMNS.join(","));
        expect(errors.join("\n")).toContain("time,regret");
    });

    it("writes an empty plot for a header-only file and exits 0", () => {
        const empty = path.join(tmpDir, "empty.csv");
        fs.writeFileSync(empty, TRACE_COLUMNS.join(",") + "\n");
        const out = path.join(tmpDir, "empty.svg");
        const code = main(["--in", empty, "--out", out]);
        expect(code).toBe(0);
        expect(fs.readFileSync(out, "utf8")).toContain("no data");
    });

    it("redirects png requests to svg", () => {
        const out = path.join(tmpDir, "fig.png");
        expect(main(["--in", FIXTURE, "--out", out])).toBe(0);
        expect(fs.existsSync(path.join(tmpDir, "fig.svg"))).toBe(true);
    });

    it("merges several input files as extra runs", () => {
        const out = path.join(tmpDir, "fig.svg");
        expect(main(["--in", FIXTURE, "--in", FIXTURE, "--out", out])).toBe(0);
        const svg = fs.readFileSync(out, "utf8");
        expect(svg).toContain("(6 runs)");
    });
});
