// Hand-rolled SVG scatter plot with a shared tooltip. Coordinate scaling is
// presentation; every number the tooltip shows is a verbatim envelope value.

import { show } from "./dom.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface ScatterPoint {
  x: number;
  y: number;
  color: string;
  shape?: "circle" | "diamond";
  faded?: boolean;
  hoverLines: string[];
  onClick?: () => void;
  cssClass?: string;
}

export interface ScatterOptions {
  width?: number;
  height?: number;
  xLabel: string;
  yLabel: string;
  lines?: { color: string; points: { x: number; y: number }[] }[];
}

let tooltipNode: HTMLDivElement | null = null;

export function tooltip(): HTMLDivElement {
  if (tooltipNode === null || !document.body.contains(tooltipNode)) {
    tooltipNode = document.createElement("div");
    tooltipNode.id = "ob-tooltip";
    tooltipNode.style.display = "none";
    document.body.append(tooltipNode);
  }
  return tooltipNode;
}

export function showTooltip(lines: string[], clientX: number, clientY: number): void {
  const node = tooltip();
  node.replaceChildren(
    ...lines.map((line) => {
      const div = document.createElement("div");
      div.textContent = line;
      return div;
    }),
  );
  node.style.left = `${clientX + 12}px`;
  node.style.top = `${clientY + 12}px`;
  node.style.display = "block";
}

export function hideTooltip(): void {
  tooltip().style.display = "none";
}

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  return node;
}

export function scatter(points: ScatterPoint[], opts: ScatterOptions): SVGSVGElement {
  const width = opts.width ?? 640;
  const height = opts.height ?? 420;
  const pad = 42;
  const xs = points.map((p) => p.x);
  const ys = points.map((p) => p.y);
  for (const line of opts.lines ?? []) {
    xs.push(...line.points.map((p) => p.x));
    ys.push(...line.points.map((p) => p.y));
  }
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(...ys);
  const yMax = Math.max(...ys);
  const xSpan = xMax - xMin || 1;
  const ySpan = yMax - yMin || 1;
  const px = (x: number) => pad + ((x - xMin) / xSpan) * (width - 2 * pad);
  const py = (y: number) => height - pad - ((y - yMin) / ySpan) * (height - 2 * pad);

  const svg = svgEl("svg", {
    viewBox: `0 0 ${width} ${height}`,
    width: String(width),
    height: String(height),
    class: "scatter",
  });
  svg.append(
    svgEl("line", {
      x1: String(pad), y1: String(height - pad),
      x2: String(width - pad), y2: String(height - pad),
      class: "axis",
    }),
    svgEl("line", {
      x1: String(pad), y1: String(pad),
      x2: String(pad), y2: String(height - pad),
      class: "axis",
    }),
  );
  const xLabel = svgEl("text", {
    x: String(width / 2), y: String(height - 8), class: "axis-label",
  });
  xLabel.textContent = opts.xLabel;
  const yLabel = svgEl("text", {
    x: "12", y: String(height / 2), class: "axis-label",
    transform: `rotate(-90 12 ${height / 2})`,
  });
  yLabel.textContent = opts.yLabel;
  svg.append(xLabel, yLabel);

  for (const line of opts.lines ?? []) {
    if (line.points.length < 2) continue;
    const coords = line.points
      .map((p) => `${px(p.x)},${py(p.y)}`)
      .join(" ");
    svg.append(
      svgEl("polyline", { points: coords, class: "front-line", stroke: line.color }),
    );
  }

  points.forEach((point, index) => {
    const cx = px(point.x);
    const cy = py(point.y);
    let node: SVGElement;
    if (point.shape === "diamond") {
      node = svgEl("path", {
        d: `M ${cx} ${cy - 7} L ${cx + 7} ${cy} L ${cx} ${cy + 7} L ${cx - 7} ${cy} Z`,
        fill: point.color,
      });
    } else {
      node = svgEl("circle", { cx: String(cx), cy: String(cy), r: "5", fill: point.color });
    }
    node.setAttribute("data-index", String(index));
    node.classList.add("point");
    if (point.cssClass) node.classList.add(point.cssClass);
    if (point.faded) node.classList.add("faded");
    node.addEventListener("mouseenter", (ev) => {
      const mouse = ev as MouseEvent;
      showTooltip(point.hoverLines, mouse.clientX, mouse.clientY);
    });
    node.addEventListener("mouseleave", hideTooltip);
    if (point.onClick) {
      node.classList.add("clickable");
      node.addEventListener("click", () => {
        hideTooltip();
        point.onClick?.();
      });
    }
    svg.append(node);
  });
  return svg;
}

export function legend(entries: { color: string; label: string }[]): HTMLElement {
  const box = document.createElement("div");
  box.className = "legend";
  for (const entry of entries) {
    const item = document.createElement("span");
    item.className = "legend-item";
    const swatch = document.createElement("span");
    swatch.className = "swatch";
    swatch.style.background = entry.color;
    item.append(swatch, ` ${entry.label}`);
    box.append(item);
  }
  return box;
}

/** Hover line list for a configuration's hyperparameter values. */
export function valueLines(values: Record<string, unknown>): string[] {
  return Object.keys(values)
    .sort()
    .map((key) => `${key}: ${show(values[key])}`);
}
