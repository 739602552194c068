// Service worker: keeps the toolbar badge in sync with the content script's
// page-load verdict. All heavy lifting lives server-side.
const BADGES: Record<string, string> = {
  qa: "✓",     // indexed: ready for questions
  prompt: "?",      // ToS links found, platform not indexed
  silent: "",
  error: "!",
  loading: "",
};

chrome.runtime.onMessage.addListener((message, sender) => {
  if (message?.type === "TOSQA_MODE") {
    const text = BADGES[message.mode] ?? "";
    chrome.action.setBadgeText({ text, tabId: sender?.tab?.id });
  }
});
