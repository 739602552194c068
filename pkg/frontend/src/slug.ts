// Platform slug from the registrable domain; must agree with the server's
// derive_platform_id so status lookups hit the platform the worker indexed.
const MULTIPART_TLDS = new Set(["co", "com", "org", "net", "gov", "edu", "ac"]);

export function platformIdGuess(url: string): string {
  let host = new URL(url).hostname.toLowerCase();
  if (host.startsWith("www.")) host = host.slice(4);
  let parts = host.split(".");
  const isIp = parts.every((p) => /^\d+$/.test(p));
  if (!isIp) {
    if (parts.length > 2 && MULTIPART_TLDS.has(parts[parts.length - 2])
        && parts[parts.length - 1].length === 2) {
      parts = parts.slice(-3);
    } else if (parts.length > 2) {
      parts = parts.slice(-2);
    }
  }
  return parts.join("-").replace(/[^a-z0-9-]+/g, "-").replace(/^-+|-+$/g, "");
}
