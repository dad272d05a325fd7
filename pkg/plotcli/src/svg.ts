/**
 * Self-contained SVG chart renderer: one mean curve per policy with a shaded
 * band of +-k standard errors, axes with round-number ticks, and a legend.
 */

import type { PolicySeries } from "./aggregate.js";

const PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

const WIDTH = 820;
const HEIGHT = 520;
const MARGIN = { top: 48, right: 24, bottom: 56, left: 72 };

export interface ChartOptions {
    title?: string;
    bandMultiplier?: number;
}

function niceTicks(lo: number, hi: number, target = 6): number[] {
    if (!(hi > lo)) hi = lo + 1;
    const span = hi - lo;
    const rawStep = span / target;
    const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
    let step = mag;
    for (const mult of [1, 2, 5, 10]) {
        if (mag * mult >= rawStep) {
            step = mag * mult;
            break;
        }
    }
    const ticks: number[] = [];
    for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-12; v += step) {
        ticks.push(Number(v.toPrecision(12)));
    }
    return ticks;
}

function fmt(v: number): string {
    return Number(v.toPrecision(6)).toString();
}

const esc = (s: string) =>
    s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export function renderRegretChart(
    series: PolicySeries[],
    options: ChartOptions = {},
): string {
    const band = options.bandMultiplier ?? 2;
    const plotW = WIDTH - MARGIN.left - MARGIN.right;
    const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;

    let tMin = Infinity, tMax = -Infinity, yMin = 0, yMax = -Infinity;
    for (const s of series) {
        for (let i = 0; i < s.t.length; i++) {
            tMin = Math.min(tMin, s.t[i]);
            tMax = Math.max(tMax, s.t[i]);
            yMax = Math.max(yMax, s.mean[i] + band * s.stderr[i]);
        }
    }
    const empty = series.length === 0;
    if (empty) {
        tMin = 0; tMax = 1; yMax = 1;
    }
    if (!(yMax > yMin)) yMax = yMin + 1;

    const x = (t: number) => MARGIN.left + ((t - tMin) / (tMax - tMin || 1)) * plotW;
    const y = (v: number) => MARGIN.top + plotH - ((v - yMin) / (yMax - yMin)) * plotH;

    const parts: string[] = [];
    parts.push(
        `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
        `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`,
    );
    parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
    if (options.title) {
        parts.push(
            `<text x="${WIDTH / 2}" y="26" text-anchor="middle" font-size="17">` +
            `${esc(options.title)}</text>`,
        );
    }

    // axes and grid
    for (const tick of niceTicks(tMin, tMax)) {
        const px = x(tick);
        parts.push(`<line x1="${px}" y1="${MARGIN.top}" x2="${px}" ` +
            `y2="${MARGIN.top + plotH}" stroke="#dddddd" stroke-width="1"/>`);
        parts.push(`<text x="${px}" y="${MARGIN.top + plotH + 20}" ` +
            `text-anchor="middle" font-size="12">${fmt(tick)}</text>`);
    }
    for (const tick of niceTicks(yMin, yMax)) {
        const py = y(tick);
        parts.push(`<line x1="${MARGIN.left}" y1="${py}" ` +
            `x2="${MARGIN.left + plotW}" y2="${py}" stroke="#dddddd" stroke-width="1"/>`);
        parts.push(`<text x="${MARGIN.left - 8}" y="${py + 4}" ` +
            `text-anchor="end" font-size="12">${fmt(tick)}</text>`);
    }
    parts.push(`<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" ` +
        `height="${plotH}" fill="none" stroke="#333333"/>`);
    parts.push(`<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 14}" ` +
        `text-anchor="middle" font-size="14">round</text>`);
    parts.push(`<text x="20" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ` +
        `font-size="14" transform="rotate(-90 20 ${MARGIN.top + plotH / 2})">` +
        `cumulative regret</text>`);

    if (empty) {
        parts.push(`<text x="${WIDTH / 2}" y="${HEIGHT / 2}" text-anchor="middle" ` +
            `font-size="14" fill="#888888">no data</text>`);
    }

    series.forEach((s, k) => {
        const color = PALETTE[k % PALETTE.length];
        const pts = s.t.map((t, i) => `${x(t).toFixed(2)},${y(s.mean[i]).toFixed(2)}`);
        if (band > 0 && s.t.length > 1) {
            const upper = s.t.map((t, i) =>
                `${x(t).toFixed(2)},${y(s.mean[i] + band * s.stderr[i]).toFixed(2)}`);
            const lower = [...s.t.keys()].reverse().map((i) =>
                `${x(s.t[i]).toFixed(2)},${y(Math.max(yMin, s.mean[i] - band * s.stderr[i])).toFixed(2)}`);
            parts.push(`<polygon class="band" data-policy="${esc(s.policy)}" ` +
                `points="${upper.join(" ")} ${lower.join(" ")}" ` +
                `fill="${color}" fill-opacity="0.15" stroke="none"/>`);
        }
        parts.push(`<polyline class="mean" data-policy="${esc(s.policy)}" ` +
            `points="${pts.join(" ")}" fill="none" stroke="${color}" stroke-width="1.8"/>`);
    });

    // legend
    series.forEach((s, k) => {
        const color = PALETTE[k % PALETTE.length];
        const ly = MARGIN.top + 16 + 18 * k;
        parts.push(`<rect x="${MARGIN.left + 10}" y="${ly - 9}" width="14" ` +
            `height="4" fill="${color}"/>`);
        parts.push(`<text x="${MARGIN.left + 30}" y="${ly}" font-size="12">` +
            `${esc(s.policy)} (${s.nRuns} runs)</text>`);
    });

    parts.push("</svg>");
    return parts.join("\n");
}
