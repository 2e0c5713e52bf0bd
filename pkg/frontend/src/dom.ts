// Tiny DOM helpers. `show` is the single number-to-text path: String(v)
// keeps displayed values bit-identical to the envelope fields.

export function show(value: unknown): string {
  if (value === null || value === undefined) return "–";
  return String(value);
}

type Attrs = Record<string, string | ((ev: Event) => void)>;

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Attrs = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (typeof value === "function") {
      node.addEventListener(key, value);
    } else {
      node.setAttribute(key, value);
    }
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export function clear(node: HTMLElement): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

export function table(
  header: string[],
  rows: (Node | string)[][],
  className = "",
): HTMLTableElement {
  const t = el("table", className ? { class: className } : {});
  const thead = el("thead");
  thead.append(el("tr", {}, header.map((h) => el("th", {}, [h]))));
  const tbody = el("tbody");
  for (const row of rows) {
    tbody.append(el("tr", {}, row.map((cell) => el("td", {}, [cell]))));
  }
  t.append(thead, tbody);
  return t;
}

export function errorCard(message: string, onRetry?: () => void): HTMLElement {
  const card = el("div", { class: "error-card" }, [
    el("strong", {}, ["Request failed: "]),
    message,
  ]);
  if (onRetry) {
    card.append(" ", el("button", { class: "retry", click: () => onRetry() }, ["Retry"]));
  }
  return card;
}
