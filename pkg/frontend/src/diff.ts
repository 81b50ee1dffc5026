// Word-level diff between consecutive revision texts. Minimal edits are
// what the workflow expects, so texts are short and a plain LCS table is
// plenty fast.

export type DiffOp = { kind: "same" | "added" | "removed"; text: string };

/** Split into word and non-word runs so whitespace survives round-trips. */
export function tokenize(text: string): string[] {
  return text.match(/\S+|\s+/g) ?? [];
}

export function diffWords(before: string, after: string): DiffOp[] {
  const a = tokenize(before);
  const b = tokenize(after);
  const rows = a.length + 1;
  const cols = b.length + 1;
  const lcs = new Array<number>(rows * cols).fill(0);
  for (let i = a.length - 1; i >= 0; i--) {
    for (let j = b.length - 1; j >= 0; j--) {
      lcs[i * cols + j] =
        a[i] === b[j]
          ? lcs[(i + 1) * cols + j + 1]! + 1
          : Math.max(lcs[(i + 1) * cols + j]!, lcs[i * cols + j + 1]!);
    }
  }
  const ops: DiffOp[] = [];
  const push = (kind: DiffOp["kind"], text: string) => {
    const last = ops[ops.length - 1];
    if (last && last.kind === kind) {
      last.text += text;
    } else {
      ops.push({ kind, text });
    }
  };
  let i = 0;
  let j = 0;
  while (i < a.length && j < b.length) {
    if (a[i] === b[j]) {
      push("same", a[i]!);
      i++;
      j++;
    } else if (lcs[(i + 1) * cols + j]! >= lcs[i * cols + j + 1]!) {
      push("removed", a[i]!);
      i++;
    } else {
      push("added", b[j]!);
      j++;
    }
  }
  while (i < a.length) push("removed", a[i++]!);
  while (j < b.length) push("added", b[j++]!);
  return ops;
}

/**
 * The first index where *corrected* diverges from *previous*: the edit
 * offset sent to the server. Null when nothing changed (the corrected
 * text is a plain prefix of the previous text).
 */
export function computeEditOffset(previous: string, corrected: string): number | null {
  const limit = Math.min(previous.length, corrected.length);
  for (let k = 0; k < limit; k++) {
    if (previous[k] !== corrected[k]) return k;
  }
  if (corrected.length > previous.length) return previous.length;
  return null; // corrected === previous[:len] -- no actual correction
}
