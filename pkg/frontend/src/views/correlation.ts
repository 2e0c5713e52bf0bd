// Budget correlation: coefficient matrix with strength labels.

import { clear, el, show } from "../dom.js";
import type { CorrelationData, Envelope } from "../types.js";

function cellClass(rho: number | null): string {
  if (rho === null) return "corr-undefined";
  const a = Math.abs(rho);
  if (a >= 0.8) return "corr-very-strong";
  if (a >= 0.6) return "corr-strong";
  if (a >= 0.4) return "corr-moderate";
  if (a >= 0.2) return "corr-weak";
  return "corr-not";
}

export function renderCorrelation(
  container: HTMLElement,
  envelope: Envelope<CorrelationData>,
): void {
  clear(container);
  const data = envelope.data;
  container.append(el("p", { class: "summary", "data-role": "summary" }, [data.summary]));

  const grid = el("table", { class: "heatmap corr", "data-role": "correlation-matrix" });
  const head = el("tr", {}, [el("th", {}, [`budget (${data.objective})`])]);
  for (const budget of data.budgets) head.append(el("th", {}, [show(budget)]));
  grid.append(el("thead", {}, [head]));
  const body = el("tbody");
  data.budgets.forEach((budget, i) => {
    const tr = el("tr", {}, [el("th", {}, [show(budget)])]);
    data.budgets.forEach((_, j) => {
      const rho = data.coefficient[i][j];
      const label = data.labels[i][j];
      const title =
        rho === null
          ? `undefined (${show(data.support[i][j])} common configs)`
          : `${label} correlation, support ${show(data.support[i][j])}`;
      tr.append(
        el("td", { class: cellClass(rho), title }, [rho === null ? "–" : show(rho)]),
      );
    });
    body.append(tr);
  });
  grid.append(body);
  container.append(grid);
}
