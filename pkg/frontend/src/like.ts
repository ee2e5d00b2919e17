// SQL-LIKE matching for the entity filter box: % matches any run,
// _ exactly one character, everything else literal, case-sensitive.
// Same semantics as the server's LIKE so filtered views stay consistent.

export function likeMatch(pattern: string, candidate: string): boolean {
  const memo = new Map<number, boolean>();
  const walk = (pi: number, ci: number): boolean => {
    if (pi === pattern.length) return ci === candidate.length;
    const key = pi * (candidate.length + 1) + ci;
    const cached = memo.get(key);
    if (cached !== undefined) return cached;
    let result: boolean;
    const ch = pattern[pi];
    if (ch === "%") {
      result = false;
      for (let k = ci; k <= candidate.length; k++) {
        if (walk(pi + 1, k)) {
          result = true;
          break;
        }
      }
    } else if (ci >= candidate.length) {
      result = false;
    } else if (ch === "_" || ch === candidate[ci]) {
      result = walk(pi + 1, ci + 1);
    } else {
      result = false;
    }
    memo.set(key, result);
    return result;
  };
  return walk(0, 0);
}
