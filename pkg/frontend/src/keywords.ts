// Must stay identical to the crawler's DEFAULT_KEYWORDS: the link-scan
// parity tests in ../tests/fixtures/linkscan hold both sides to it.
export const TOS_KEYWORDS = [
  "terms",
  "privacy",
  "policy",
  "legal",
  "agreement",
  "eula",
  "conditions",
];
