// Options page: stores the API base URL the extension should talk to.
export const DEFAULT_API_BASE_URL = "http://127.0.0.1:8765";

export async function loadApiBaseUrl(): Promise<string> {
  if (typeof chrome === "undefined" || !chrome.storage) return DEFAULT_API_BASE_URL;
  const stored = await chrome.storage.sync.get({ api_base_url: DEFAULT_API_BASE_URL });
  return stored.api_base_url;
}

export async function saveApiBaseUrl(url: string): Promise<void> {
  if (typeof chrome === "undefined" || !chrome.storage) return;
  await chrome.storage.sync.set({ api_base_url: url.replace(/\/+$/, "") });
}

export function wireOptionsPage(doc: Document): void {
  const input = doc.querySelector<HTMLInputElement>("#api-base-url");
  const save = doc.querySelector<HTMLButtonElement>("#save");
  const status = doc.querySelector<HTMLElement>("#status");
  if (!input || !save) return;
  void loadApiBaseUrl().then((url) => {
    input.value = url;
  });
  save.addEventListener("click", () => {
    void saveApiBaseUrl(input.value.trim()).then(() => {
      if (status) status.textContent = "Saved.";
    });
  });
}

if (typeof document !== "undefined" && document.querySelector("#api-base-url")) {
  wireOptionsPage(document);
}
