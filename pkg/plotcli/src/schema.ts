/**
 * Trace CSV schema: strict parsing of the experiment harness output.
 */

export const TRACE_COLUMNS = [
    "run_id", "policy", "t", "decision", "instant_regret", "cum_regret",
    "epsilon_sq", "lambda", "dec_value", "est_increment", "seed",
] as const;

export interface TraceRow {
    runKey: string;
    policy: string;
    t: number;
    cumRegret: number;
}

export class SchemaError extends Error {
    constructor(message: string) {
        super(message);
        this.name = "SchemaError";
    }
}

/**
 * Parse one trace CSV. Rows whose cumulative regret is not finite (aborted
 * runs) are dropped. runKey is prefixed with the source tag so run ids from
 * different files never collide.
 */
export function parseTraceCsv(text: string, sourceTag = "0"): TraceRow[] {
    const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
    if (lines.length === 0) {
        throw new SchemaError("empty file: expected a trace header");
    }
    const header = lines[0].split(",");
    const expected = TRACE_COLUMNS.join(",");
    if (header.join(",") !== expected) {
        throw new SchemaError(
            `header mismatch:\n  expected: ${expected}\n  found:    ${header.join(",")}`,
        );
    }
    const rows: TraceRow[] = [];
    for (let i = 1; i < lines.length; i++) {
        const parts = lines[i].split(",");
        if (parts.length !== TRACE_COLUMNS.length) {
            throw new SchemaError(
                `line ${i + 1}: expected ${TRACE_COLUMNS.length} fields, found ${parts.length}`,
            );
        }
        const t = Number(parts[2]);
        const cumRegret = Number(parts[5]);
        if (!Number.isInteger(t) || t < 1) {
            throw new SchemaError(`line ${i + 1}: bad round index ${parts[2]}`);
        }
        if (!Number.isFinite(cumRegret)) {
            continue; // aborted-run marker row
        }
        rows.push({
            runKey: `${sourceTag}:${parts[0]}`,
            policy: parts[1],
            t,
            cumRegret,
        });
    }
    return rows;
}
