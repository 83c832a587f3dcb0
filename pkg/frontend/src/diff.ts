// Sentence-level comparison between the two candidate groups: the UI
// highlights positions where A and B disagree and marks the differing words.

export interface SentenceDiff {
  index: number
  differs: boolean
  aWords: { word: string; changed: boolean }[]
  bWords: { word: string; changed: boolean }[]
}

export function diffGroups(a: string[], b: string[]): SentenceDiff[] {
  const n = Math.max(a.length, b.length)
  const out: SentenceDiff[] = []
  for (let i = 0; i < n; i++) {
    const sa = a[i] ?? ''
    const sb = b[i] ?? ''
    const wa = sa.length ? sa.split(/\s+/) : []
    const wb = sb.length ? sb.split(/\s+/) : []
    const norm = (x: string) => x.trim().split(/\s+/).join(' ')
    const differs = norm(sa) !== norm(sb)
    const aWords = wa.map((w, j) => ({ word: w, changed: differs && w !== wb[j] }))
    const bWords = wb.map((w, j) => ({ word: w, changed: differs && w !== wa[j] }))
    out.push({ index: i, differs, aWords, bWords })
  }
  return out
}
