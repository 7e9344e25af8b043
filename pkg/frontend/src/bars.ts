import { Bar } from "./types";

/** Order bars by |phi| descending; ties broken by feature index. */
export function orderBars(phi: number[], names: string[]): Bar[] {
  if (phi.length !== names.length) {
    throw new Error(`phi length ${phi.length} != ${names.length} names`);
  }
  return phi
    .map((value, index) => ({ index, name: names[index]!, phi: value }))
    .sort((a, b) => {
      const diff = Math.abs(b.phi) - Math.abs(a.phi);
      return diff !== 0 ? diff : a.index - b.index;
    });
}
