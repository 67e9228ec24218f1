/** Hand-rolled SVG step chart for monthly survival curves.
 *
 * Curves are drawn as step functions (the model is month-indexed, nothing
 * between months exists to interpolate). A series with values outside
 * [0, 1] or a non-monotone curve renders a data-integrity warning instead
 * of a plot.
 */

import { inUnitInterval } from "./format.js";

export interface ChartSeries {
  label: string;
  months: number[];
  survival: number[];
  lower?: number[] | null;
  upper?: number[] | null;
  color?: string;
}

const WIDTH = 640;
const HEIGHT = 340;
const MARGIN = { top: 16, right: 16, bottom: 34, left: 44 };
const PALETTE = ["#1c6fb8", "#d1495b", "#2e8b57", "#9467bd", "#e0a100", "#4d4d4d"];

const SVG_NS = "http://www.w3.org/2000/svg";

export function curveIntegrityProblem(series: ChartSeries): string | null {
  const { survival, lower, upper, months } = series;
  if (survival.length !== months.length || survival.length === 0) {
    return "curve and month grid lengths disagree";
  }
  if (!survival.every(inUnitInterval)) {
    return "survival probability outside [0, 1]";
  }
  for (let i = 1; i < survival.length; i++) {
    if (survival[i] > survival[i - 1]) {
      return "survival curve is not non-increasing";
    }
  }
  for (const band of [lower, upper]) {
    if (band && (band.length !== survival.length || !band.every(inUnitInterval))) {
      return "confidence band outside [0, 1]";
    }
  }
  return null;
}

function el<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  return node;
}

function stepPath(
  months: number[],
  values: number[],
  x: (m: number) => number,
  y: (v: number) => number,
): string {
  let d = `M ${x(months[0])} ${y(values[0])}`;
  for (let i = 1; i < months.length; i++) {
    d += ` H ${x(months[i])} V ${y(values[i])}`;
  }
  d += ` H ${x(months[months.length - 1] + 1)}`;
  return d;
}

function bandPath(
  months: number[],
  lower: number[],
  upper: number[],
  x: (m: number) => number,
  y: (v: number) => number,
): string {
  let d = `M ${x(months[0])} ${y(upper[0])}`;
  for (let i = 1; i < months.length; i++) {
    d += ` H ${x(months[i])} V ${y(upper[i])}`;
  }
  d += ` H ${x(months[months.length - 1] + 1)}`;
  d += ` V ${y(lower[lower.length - 1])}`;
  for (let i = months.length - 1; i >= 1; i--) {
    d += ` H ${x(months[i])} V ${y(lower[i - 1])}`;
  }
  d += ` H ${x(months[0])} Z`;
  return d;
}

/** Replace `container` content with the chart (or an integrity warning). */
export function renderSurvivalChart(container: HTMLElement, series: ChartSeries[]): void {
  container.replaceChildren();
  if (series.length === 0) {
    return;
  }
  for (const s of series) {
    const problem = curveIntegrityProblem(s);
    if (problem) {
      const warning = document.createElement("div");
      warning.className = "data-integrity-warning";
      warning.setAttribute("role", "alert");
      warning.textContent = `Data integrity problem in "${s.label}": ${problem}. Curve not plotted.`;
      container.appendChild(warning);
      return;
    }
  }

  const maxMonth = Math.max(...series.map((s) => s.months[s.months.length - 1])) + 1;
  const x = (m: number) =>
    MARGIN.left + (m / maxMonth) * (WIDTH - MARGIN.left - MARGIN.right);
  const y = (v: number) =>
    MARGIN.top + (1 - v) * (HEIGHT - MARGIN.top - MARGIN.bottom);

  const svg = el("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    class: "survival-chart",
    role: "img",
  });

  for (const tick of [0, 0.25, 0.5, 0.75, 1]) {
    svg.appendChild(
      el("line", {
        x1: String(MARGIN.left),
        x2: String(WIDTH - MARGIN.right),
        y1: String(y(tick)),
        y2: String(y(tick)),
        class: "gridline",
        stroke: "#ddd",
      }),
    );
    const label = el("text", {
      x: String(MARGIN.left - 6),
      y: String(y(tick) + 4),
      "text-anchor": "end",
      class: "tick-label",
    });
    label.textContent = tick.toFixed(2);
    svg.appendChild(label);
  }
  const monthStep = maxMonth > 24 ? 12 : 6;
  for (let m = 0; m <= maxMonth; m += monthStep) {
    const label = el("text", {
      x: String(x(m)),
      y: String(HEIGHT - MARGIN.bottom + 16),
      "text-anchor": "middle",
      class: "tick-label",
    });
    label.textContent = String(m);
    svg.appendChild(label);
  }

  series.forEach((s, i) => {
    const color = s.color ?? PALETTE[i % PALETTE.length];
    if (s.lower && s.upper) {
      svg.appendChild(
        el("path", {
          d: bandPath(s.months, s.lower, s.upper, x, y),
          fill: color,
          "fill-opacity": "0.15",
          stroke: "none",
          class: "confidence-band",
        }),
      );
    }
    svg.appendChild(
      el("path", {
        d: stepPath(s.months, s.survival, x, y),
        fill: "none",
        stroke: color,
        "stroke-width": "2",
        class: "survival-step",
        "data-label": s.label,
      }),
    );
  });

  svg.appendChild(
    el("line", {
      x1: String(MARGIN.left),
      x2: String(WIDTH - MARGIN.right),
      y1: String(y(0)),
      y2: String(y(0)),
      stroke: "#555",
    }),
  );

  container.appendChild(svg);

  const legend = document.createElement("div");
  legend.className = "chart-legend";
  series.forEach((s, i) => {
    const item = document.createElement("span");
    item.className = "legend-item";
    const swatch = document.createElement("span");
    swatch.className = "legend-swatch";
    swatch.style.backgroundColor = s.color ?? PALETTE[i % PALETTE.length];
    item.append(swatch, document.createTextNode(s.label));
    legend.appendChild(item);
  });
  container.appendChild(legend);
}
