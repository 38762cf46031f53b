/** Nile syntax highlighting. Output is HTML with one span.line per source
 * line so callers can mark lines (parse errors, conflicting clauses). */

const KEYWORDS = new Set([
  "define", "intent", "from", "to", "for", "add", "with", "allow",
  "block", "start", "end", "endpoint", "middlebox", "client", "traffic",
  "flow", "latency", "jitter", "loss", "throughput", "hour", "date",
  "datetime", "none", "protocol", "src_port", "src_ip", "dest_port",
  "dest_ip", "less", "more", "or", "equal", "different",
]);

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const TOKEN = /('[^']*')|([A-Za-z_][A-Za-z0-9_]*)|([^'A-Za-z_]+)/g;

function highlightLine(line: string): string {
  let out = "";
  for (const m of line.matchAll(TOKEN)) {
    if (m[1] !== undefined) {
      out += `<span class="str">${escapeHtml(m[1])}</span>`;
    } else if (m[2] !== undefined) {
      out += KEYWORDS.has(m[2])
        ? `<span class="kw">${m[2]}</span>`
        : escapeHtml(m[2]);
    } else {
      out += escapeHtml(m[3]);
    }
  }
  return out;
}

export function highlightNile(text: string): string {
  return text
    .split("\n")
    .map((line, i) => `<span class="line" data-line="${i + 1}">${highlightLine(line)}</span>`)
    .join("\n");
}

/** First 1-based line whose clause keyword matches a conflict reference
 * like "qos[2]" or "locations[0]"; 0 when nothing matches. */
export function clauseLine(nile: string, clauseRef: string): number {
  const family = clauseRef.replace(/\[.*$/, "");
  const starters: Record<string, string[]> = {
    locations: ["from", "to"],
    targets: ["for"],
    middleboxes: ["add"],
    qos: ["with"],
    rules: ["allow", "block"],
    interval: ["start"],
  };
  const words = starters[family];
  if (!words) return 0;
  const lines = nile.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const first = lines[i].trim().split(/[\s(]/, 1)[0];
    if (words.includes(first)) return i + 1;
  }
  return 0;
}
