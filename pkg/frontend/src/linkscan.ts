// In-page ToS link scanner. Mirrors the server crawler's discover_tos_links
// exactly: anchors in document order whose text or resolved URL path contains
// a keyword (case-insensitive), http(s) only, fragment-only links skipped,
// deduplicated keeping the first occurrence.
import { TOS_KEYWORDS } from "./keywords";

function normalize(url: URL): string {
  const clone = new URL(url.href);
  clone.hash = "";
  return clone.href;
}

export function scanTosLinks(
  doc: Document,
  baseUrl: string,
  keywords: string[] = TOS_KEYWORDS,
): string[] {
  const lowered = keywords.map((k) => k.toLowerCase());
  const seen = new Set<string>();
  const found: string[] = [];
  for (const anchor of Array.from(doc.querySelectorAll("a"))) {
    const href = (anchor.getAttribute("href") || "").trim();
    if (!href || href.startsWith("#")) continue;
    let resolved: URL;
    try {
      resolved = new URL(href, baseUrl);
    } catch {
      continue;
    }
    if (resolved.protocol !== "http:" && resolved.protocol !== "https:") continue;
    const text = (anchor.textContent || "").toLowerCase();
    const path = resolved.pathname.toLowerCase();
    if (!lowered.some((k) => text.includes(k) || path.includes(k))) continue;
    const normalized = normalize(resolved);
    if (!seen.has(normalized)) {
      seen.add(normalized);
      found.push(normalized);
    }
  }
  return found;
}

export interface PageScanResult {
  origin: string;
  platformIdGuess: string;
  detectedLinks: string[];
  indexed: boolean;
}
