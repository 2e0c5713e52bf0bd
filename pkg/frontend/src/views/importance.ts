// Hyperparameter importance: bar chart with std whiskers and a method
// toggle between the global (fanova) and local (lpi) analyses.

import { clear, el, show } from "../dom.js";
import type { Envelope, ImportanceData } from "../types.js";

export interface ImportanceHandlers {
  onMethodChange: (method: "fanova" | "lpi") => void;
}

export function renderImportance(
  container: HTMLElement,
  envelope: Envelope<ImportanceData>,
  handlers: ImportanceHandlers,
): void {
  clear(container);
  const data = envelope.data;

  const select = el("select", {
    "data-role": "method-toggle",
    change: () => handlers.onMethodChange(select.value as "fanova" | "lpi"),
  }) as HTMLSelectElement;
  for (const method of ["fanova", "lpi"] as const) {
    const option = el("option", { value: method }, [method]) as HTMLOptionElement;
    option.selected = method === data.method;
    select.append(option);
  }
  container.append(
    el("p", {}, [
      `Importance (${data.method}) for ${data.objective} at budget ${show(data.budget)}, `,
      `${show(data.n_trees)} trees, seed ${show(data.seed)}`,
    ]),
    el("label", { class: "filter" }, ["method: ", select]),
  );
  if (data.flat_neighborhood) {
    container.append(
      el("p", { class: "warning" }, ["Flat neighborhood: all local variances are zero."]),
    );
  }

  const chart = el("div", { class: "bars", "data-role": "importance-bars" });
  const maxMean = Math.max(...data.scores.map((s) => s.mean), 1e-12);
  for (const score of data.scores) {
    const row = el("div", { class: "bar-row", "data-name": score.name });
    const widthPct = Math.max(0, Math.min(1, score.mean / maxMean)) * 100;
    const whiskerPct = Math.max(0, Math.min(1, score.std / maxMean)) * 100;
    const bar = el("div", { class: "bar" });
    bar.style.width = `${widthPct}%`;
    const whisker = el("span", { class: "whisker" });
    whisker.style.width = `${whiskerPct}%`;
    bar.append(whisker);
    row.append(
      el("span", { class: "bar-label" }, [score.name]),
      el("div", { class: "bar-track" }, [bar]),
      el("span", { class: "bar-value" }, [`${show(score.mean)} ± ${show(score.std)}`]),
    );
    chart.append(row);
  }
  container.append(chart);
}
