/** DOM and SVG construction. Pure functions from server data to elements;
 * no numbers are computed here beyond coordinate scaling. */

import type {
  BirdseyeData,
  MetricsReport,
  PixelPrecision,
  ZoneCounts,
} from "./types.js";
import { SEVERITY_LEVELS, detentText } from "./severity.js";
import { CLASS_NAMES, MatrixModel } from "./matrix.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export interface SliderHooks {
  onChange: (classIndex: number, exponent: number) => void;
  onConfirm: (classIndex: number) => void;
}

/** One discrete seven-detent slider row for a confused class. */
export function sliderRow(
  classIndex: number,
  className: string,
  hooks: SliderHooks,
): HTMLElement {
  const row = el("div", "slider-row");
  row.dataset.classIndex = String(classIndex);
  row.append(el("span", "slider-class", className));

  const input = document.createElement("input");
  input.type = "range";
  input.min = "0";
  input.max = "6";
  input.step = "1";
  input.value = "0";
  const valueLabel = el(
    "span",
    "slider-value",
    detentText(SEVERITY_LEVELS[0]!),
  );
  input.addEventListener("input", () => {
    const exponent = Number(input.value);
    valueLabel.textContent = detentText(SEVERITY_LEVELS[exponent]!);
    row.classList.add("touched");
    hooks.onChange(classIndex, exponent);
  });

  const confirm = el("button", "confirm-default", "keep 1 (marginal)");
  confirm.addEventListener("click", () => {
    row.classList.add("touched");
    hooks.onConfirm(classIndex);
  });

  row.append(input, valueLabel, confirm);
  return row;
}

/** Locked row shown for the highlighted class itself. */
export function lockedTargetRow(className: string): HTMLElement {
  const row = el("div", "slider-row locked");
  row.append(
    el("span", "slider-class", className),
    el("span", "slider-value", "0 (correct class, no cost)"),
  );
  return row;
}

export function matrixGrid(
  model: MatrixModel,
  onEdit: (row: number, col: number, value: number) => void,
): HTMLElement {
  const table = el("table", "matrix-grid");
  const head = el("tr");
  head.append(el("th", "", "pred \\ true"));
  for (const name of CLASS_NAMES) head.append(el("th", "", name));
  table.append(head);
  for (let j = 0; j < model.n; j++) {
    const tr = el("tr");
    tr.append(el("th", "", CLASS_NAMES[j] ?? `class ${j}`));
    for (let k = 0; k < model.n; k++) {
      const td = el("td");
      td.dataset.row = String(j);
      td.dataset.col = String(k);
      if (j === k) {
        td.className = "diagonal";
        td.textContent = "-";
      } else {
        const input = document.createElement("input");
        input.type = "number";
        input.min = "0";
        input.max = "6";
        input.step = "0.01";
        input.value = String(model.cell(j, k));
        const linear = el("span", "linear", model.cellDisplay(j, k));
        input.addEventListener("change", () => {
          onEdit(j, k, Number(input.value));
        });
        td.append(input, linear);
      }
      tr.append(td);
    }
    table.append(tr);
  }
  return table;
}

export function metricsTable(report: MetricsReport): HTMLElement {
  const table = el("table", "metrics");
  const head = el("tr");
  for (const h of ["class", "IoU", "recall", "precision"]) {
    head.append(el("th", "", h));
  }
  table.append(head);
  const fmt = (v: number | null) =>
    v === null ? "-" : `${(100 * v).toFixed(1)}%`;
  const names = report.class_names ?? CLASS_NAMES.slice();
  names.forEach((name, i) => {
    const tr = el("tr");
    tr.append(
      el("td", "", name),
      el("td", "", fmt(report.iou[i] ?? null)),
      el("td", "", fmt(report.recall[i] ?? null)),
      el("td", "", fmt(report.precision[i] ?? null)),
    );
    table.append(tr);
  });
  const mean = el("tr", "mean-row");
  mean.append(
    el("td", "", "mean"),
    el("td", "", fmt(report.mean_iou)),
    el("td", "", fmt(report.mean_recall)),
    el("td", "", fmt(report.mean_precision)),
  );
  table.append(mean);
  return table;
}

export function zonesTable(zones: ZoneCounts[], names: string[]): HTMLElement {
  const table = el("table", "zones");
  const head = el("tr");
  for (const h of [
    "zone",
    "humans",
    `overlooked by ${names[0] ?? "A"}`,
    `overlooked by ${names[1] ?? "B"}`,
    "overlooked by both",
  ]) {
    head.append(el("th", "", h));
  }
  table.append(head);
  for (const z of zones) {
    const tr = el("tr");
    tr.append(
      el("td", "", `${z.name} (<= ${z.max_distance_m} m)`),
      el("td", "", String(z.total)),
      el("td", "", String(z.overlooked_a)),
      el("td", "", String(z.overlooked_b)),
      el("td", "", String(z.overlooked_both)),
    );
    table.append(tr);
  }
  return table;
}

function svgEl(tag: string, attrs: Record<string, string>): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  return node;
}

const CATEGORY_COLORS: Record<string, string> = {
  overlooked_both: "#7a7a7a",
  only_a: "#2c7fb8",
  only_b: "#d95f02",
};

/** Bird's-eye scatter from server-computed coordinates. */
export function birdseyeSvg(data: BirdseyeData, size = 420): SVGElement {
  const svg = svgEl("svg", {
    viewBox: `0 0 ${size} ${size}`,
    width: String(size),
    height: String(size),
    class: "birdseye",
  });
  const margin = 24;
  const cx = size / 2;
  const cy = size - margin;
  const scale = (size - 2 * margin) / data.max_radius_m;
  const at = (xm: number, ym: number) =>
    [cx + scale * xm, cy - scale * ym] as const;

  if (data.layout === "wedge") {
    const half = (data.field_half_angle_deg * Math.PI) / 180;
    const sector = (radius: number, fill: string) => {
      const [x1, y1] = at(radius * Math.sin(-half), radius * Math.cos(half));
      const [x2, y2] = at(radius * Math.sin(half), radius * Math.cos(half));
      const r = scale * radius;
      return svgEl("path", {
        d: `M ${cx} ${cy} L ${x1} ${y1} A ${r} ${r} 0 0 1 ${x2} ${y2} Z`,
        fill,
        stroke: "#999",
        "stroke-width": "1",
      });
    };
    svg.append(sector(data.max_radius_m, "#fbfbfb"));
    const ordered = [...data.zones].sort(
      (a, b) => b.max_distance_m - a.max_distance_m,
    );
    const fills = ["#fee8d8", "#fddbc7"];
    ordered.forEach((zone, i) => {
      svg.append(
        sector(zone.max_distance_m, fills[Math.min(i, fills.length - 1)]!),
      );
      const [, ly] = at(0, zone.max_distance_m);
      const label = svgEl("text", {
        x: String(cx + 6),
        y: String(ly - 4),
        "font-size": "11",
        fill: "#555",
      });
      label.textContent = `${zone.name} (${zone.max_distance_m} m)`;
      svg.append(label);
    });
  }
  for (const point of data.points) {
    const [px, py] = at(point.x, point.y);
    const color = CATEGORY_COLORS[point.category] ?? "#333";
    if (point.category === "overlooked_both") {
      const s = 4;
      for (const [dx1, dy1, dx2, dy2] of [
        [-s, -s, s, s],
        [-s, s, s, -s],
      ] as const) {
        svg.append(
          svgEl("line", {
            x1: String(px + dx1),
            y1: String(py + dy1),
            x2: String(px + dx2),
            y2: String(py + dy2),
            stroke: color,
            "stroke-width": "2",
          }),
        );
      }
    } else {
      svg.append(
        svgEl("circle", {
          cx: String(px),
          cy: String(py),
          r: "4",
          fill: color,
        }),
      );
    }
  }
  svg.append(
    svgEl("rect", {
      x: String(cx - 5),
      y: String(cy - 3),
      width: "10",
      height: "14",
      rx: "3",
      fill: "#222",
    }),
  );
  return svg;
}

/** Two-slice precision pie (practicability view). */
export function precisionPie(
  precision: PixelPrecision,
  title: string,
  size = 140,
): HTMLElement {
  const wrap = el("div", "pie");
  const svg = svgEl("svg", {
    viewBox: `0 0 ${size} ${size}`,
    width: String(size),
    height: String(size),
  });
  const cx = size / 2;
  const cy = size / 2;
  const r = size / 2 - 6;
  const share = precision.precision ?? 0;
  const angle = share * 2 * Math.PI;
  const x = cx + r * Math.sin(angle);
  const y = cy - r * Math.cos(angle);
  const largeArc = share > 0.5 ? 1 : 0;
  svg.append(
    svgEl("circle", { cx: String(cx), cy: String(cy), r: String(r),
                      fill: "#d95f5f" }),
  );
  if (share >= 1) {
    svg.append(
      svgEl("circle", { cx: String(cx), cy: String(cy), r: String(r),
                        fill: "#3a9d5d" }),
    );
  } else if (share > 0) {
    svg.append(
      svgEl("path", {
        d: `M ${cx} ${cy} L ${cx} ${cy - r} A ${r} ${r} 0 ${largeArc} 1 ` +
          `${x} ${y} Z`,
        fill: "#3a9d5d",
      }),
    );
  }
  wrap.append(svg);
  const pct =
    precision.precision === null
      ? "no human pixels predicted"
      : `TP ${(100 * precision.precision).toFixed(2)}% of ` +
        `${precision.total_pixels.toLocaleString()} px`;
  wrap.append(el("div", "pie-title", title), el("div", "pie-sub", pct));
  return wrap;
}
