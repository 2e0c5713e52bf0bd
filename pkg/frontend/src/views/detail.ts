// Configuration detail page: origin, hyperparameter values, per-budget
// objective values, and a copyable native-format snippet.

import { clear, el, show, table } from "../dom.js";
import type { ConfigDetail } from "../types.js";

export function renderDetail(
  container: HTMLElement,
  detail: ConfigDetail,
  onBack?: () => void,
): void {
  clear(container);
  const heading = el("h2", {}, [
    `Configuration ${show(detail.config_id)} of run ${detail.run_id}`,
  ]);
  container.append(heading);
  if (onBack) {
    container.append(el("button", { class: "back", click: () => onBack() }, ["← back"]));
  }

  const metaRows = Object.keys(detail.origin.meta)
    .sort()
    .map((key) => [key, show(detail.origin.meta[key])] as string[]);
  container.append(
    el("h3", {}, ["Origin"]),
    table(["field", "value"], [["run", detail.origin.run_id], ...metaRows], "origin-table"),
  );

  const valueRows = Object.keys(detail.values)
    .sort()
    .map((name) => [name, show(detail.values[name])] as string[]);
  container.append(
    el("h3", {}, ["Hyperparameters"]),
    table(["name", "value"], valueRows, "values-table"),
  );

  const objectives = Object.keys(detail.per_budget_costs[0]?.costs ?? {});
  const costRows = detail.per_budget_costs.map((row) => [
    show(row.budget),
    ...objectives.map((name) => show(row.costs[name])),
  ]);
  container.append(
    el("h3", {}, ["Objective values per budget"]),
    table(["budget", ...objectives], costRows, "costs-table"),
  );

  const snippet = el("pre", { class: "snippet", "data-role": "config-snippet" }, [
    detail.native_line,
  ]);
  const copy = el("button", {
    class: "copy",
    click: () => {
      void navigator.clipboard?.writeText(detail.native_line);
    },
  }, ["copy"]);
  container.append(
    el("h3", {}, ["Copyable configuration (native configs.jsonl line)"]),
    snippet,
    copy,
  );
}
