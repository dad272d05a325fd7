#!/usr/bin/env node
/**
 * plot — render cumulative-regret curves from experiment trace CSVs.
 *
 * Usage:
 *   plot --in traces.csv [--in more.csv] --out fig.svg
 *        [--policies a,b] [--band 2] [--title text]
 *
 * Output is an SVG vector image; a .png output path is redirected to .svg.
 * Exits nonzero on schema mismatches, with column diagnostics.
 */

import * as fs from "fs";

import { aggregateByPolicy, downsample } from "./aggregate.js";
import { renderRegretChart } from "./svg.js";
import { SchemaError, parseTraceCsv, type TraceRow } from "./schema.js";

interface Args {
    inputs: string[];
    out: string;
    policies?: string[];
    band: number;
    title?: string;
}

export function parseArgs(argv: string[]): Args {
    const args: Args = { inputs: [], out: "", band: 2 };
    for (let i = 0; i < argv.length; i++) {
        const flag = argv[i];
        const next = () => {
            i += 1;
            if (i >= argv.length) throw new Error(`missing value for ${flag}`);
            return argv[i];
        };
        switch (flag) {
            case "--in":
                args.inputs.push(next());
                break;
            case "--out":
                args.out = next();
                break;
            case "--policies":
                args.policies = next().split(",").map((s) => s.trim()).filter(Boolean);
                break;
            case "--band":
                args.band = Number(next());
                break;
            case "--title":
                args.title = next();
                break;
            default:
                throw new Error(`unknown flag ${flag}`);
        }
    }
    if (args.inputs.length === 0) throw new Error("need at least one --in file");
    if (!args.out) throw new Error("need --out");
    if (!(args.band >= 0)) throw new Error("--band must be nonnegative");
    return args;
}

export function main(argv: string[]): number {
    let args: Args;
    try {
        args = parseArgs(argv);
    } catch (err) {
        console.error(`error: ${(err as Error).message}`);
        return 2;
    }

    const rows: TraceRow[] = [];
    for (let i = 0; i < args.inputs.length; i++) {
        const path = args.inputs[i];
        let text: string;
        try {
            text = fs.readFileSync(path, "utf8");
        } catch (err) {
            console.error(`error: cannot read ${path}: ${(err as Error).message}`);
            return 2;
        }
        try {
            rows.push(...parseTraceCsv(text, String(i)));
        } catch (err) {
            if (err instanceof SchemaError) {
                console.error(`error: ${path}: ${err.message}`);
                return 1;
            }
            throw err;
        }
    }

    const series = aggregateByPolicy(rows, args.policies)
        .map((s) => downsample(s, 500));
    if (series.length === 0) {
        console.warn("warning: no data rows; writing an empty plot");
    }
    const svg = renderRegretChart(series, {
        title: args.title,
        bandMultiplier: args.band,
    });

    let out = args.out;
    if (out.toLowerCase().endsWith(".png")) {
        out = out.slice(0, -4) + ".svg";
        console.warn(`warning: raster output is not supported; writing ${out}`);
    }
    fs.writeFileSync(out, svg);
    console.log(`wrote ${out} (${series.length} curves)`);
    return 0;
}

function isDirectRun(): boolean {
    if (!process.argv[1]) return false;
    try {
        const invoked = new URL(`file://${fs.realpathSync(process.argv[1])}`).href;
        return import.meta.url === invoked;
    } catch {
        return false;
    }
}

if (isDirectRun()) {
    process.exit(main(process.argv.slice(2)));
}
